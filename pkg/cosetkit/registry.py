"""
Command Registry Module

Provides the @command decorator and global registry for cosetkit commands.
Commands are registered automatically when decorated; the CLI and the HTTP
server both build their surfaces from the registry.

A command takes exactly one pydantic request model and returns a pydantic
model (or a list of them), so arguments can be validated the same way
whether they come from argparse or from a JSON body.
"""

from __future__ import annotations

import inspect
import types
from collections.abc import Callable
from typing import Any, Union, get_args, get_origin, get_type_hints

from pydantic import BaseModel


class CommandInfo:
    """Stores metadata about a registered command."""

    def __init__(
        self,
        name: str,
        func: Callable[[Any], Any],
        request_model: type[BaseModel],
        return_type: Any,
        docstring: str | None,
        module: str,
    ):
        self.name = name
        self.func = func
        self.request_model = request_model
        self.return_type = return_type
        self.docstring = docstring
        self.module = module

    @property
    def summary(self) -> str:
        """First line of the docstring."""
        return (self.docstring or "").strip().split("\n")[0]

    def run(self, payload: dict[str, Any] | BaseModel) -> Any:
        """Validate a payload against the request model and call the command."""
        request = (
            payload
            if isinstance(payload, self.request_model)
            else self.request_model.model_validate(payload)
        )
        return self.func(request)

    def __repr__(self) -> str:
        return f"CommandInfo(name={self.name!r}, module={self.module!r})"


class CommandRegistry:
    """
    Global registry for all cosetkit commands.

    Maintains a flat namespace of commands and ensures no duplicates.
    Collects the pydantic models used in signatures for the /commands listing.
    """

    _instance: CommandRegistry | None = None
    _commands: dict[str, CommandInfo]
    _models: dict[str, type[BaseModel]]

    def __new__(cls) -> CommandRegistry:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._commands = {}
            cls._instance._models = {}
        return cls._instance

    @classmethod
    def get_instance(cls) -> CommandRegistry:
        """Get the singleton registry instance."""
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    @classmethod
    def reset(cls) -> None:
        """Reset the registry (useful for testing)."""
        if cls._instance is not None:
            cls._instance._commands.clear()
            cls._instance._models.clear()

    def register(self, cmd: CommandInfo) -> None:
        """
        Register a command.

        Raises:
            ValueError: If a command with the same name already exists.
        """
        if cmd.name in self._commands:
            existing = self._commands[cmd.name]
            raise ValueError(
                f"Command name conflict: '{cmd.name}' is defined in both "
                f"'{existing.module}' and '{cmd.module}'. "
                f"Command names must be unique across all modules."
            )
        self._commands[cmd.name] = cmd

    def get_command(self, name: str) -> CommandInfo | None:
        """Get a command by name."""
        return self._commands.get(name)

    def get_all_commands(self) -> dict[str, CommandInfo]:
        """Get all registered commands."""
        return self._commands.copy()

    def get_all_models(self) -> dict[str, type[BaseModel]]:
        """Get all registered pydantic models."""
        return self._models.copy()

    def collect_models_from_type(self, type_hint: Any) -> None:
        """
        Recursively collect pydantic models from a type hint.

        Handles Optional, list, dict and nested models.
        """
        if type_hint is None:
            return

        origin = get_origin(type_hint)

        if origin is Union or origin is types.UnionType:
            for arg in get_args(type_hint):
                if arg is not type(None):
                    self.collect_models_from_type(arg)
            return

        if origin is not None:
            for arg in get_args(type_hint):
                self.collect_models_from_type(arg)
            return

        if isinstance(type_hint, type) and issubclass(type_hint, BaseModel):
            if type_hint.__name__ not in self._models:
                self._models[type_hint.__name__] = type_hint
                for field_info in type_hint.model_fields.values():
                    self.collect_models_from_type(field_info.annotation)


# Global registry instance
_registry = CommandRegistry.get_instance()


def command(
    func: Callable[..., Any] | None = None,
    *,
    name: str | None = None,
) -> Callable[..., Any]:
    """
    Decorator to register a function as a cosetkit command.

    Usage:
        @command
        def energy(request: EnergyRequest) -> EnergyReport:
            ...

        @command(name="gray-tables")
        def tables(request: TablesRequest) -> GrayTableResponse:
            ...

    Args:
        func: The function to decorate.
        name: Optional custom command name (defaults to function name).

    Returns:
        The function itself, unchanged apart from a `_cosetkit_command` attribute.

    Raises:
        ValueError: If the function does not take a single pydantic model, or
            the name is already taken.
    """

    def decorator(fn: Callable[..., Any]) -> Callable[..., Any]:
        cmd_name = name or fn.__name__
        hints = get_type_hints(fn)
        params = list(inspect.signature(fn).parameters)
        request_model = hints.get(params[0]) if len(params) == 1 else None
        if not (isinstance(request_model, type) and issubclass(request_model, BaseModel)):
            raise ValueError(
                f"Command '{cmd_name}' must take exactly one pydantic model argument"
            )

        return_type = hints.get("return")
        _registry.collect_models_from_type(request_model)
        _registry.collect_models_from_type(return_type)

        cmd_info = CommandInfo(
            name=cmd_name,
            func=fn,
            request_model=request_model,
            return_type=return_type,
            docstring=fn.__doc__,
            module=fn.__module__,
        )
        _registry.register(cmd_info)
        fn._cosetkit_command = cmd_info  # type: ignore[attr-defined]
        return fn

    if func is not None:
        return decorator(func)
    return decorator


def get_registry() -> CommandRegistry:
    """Get the global command registry."""
    return _registry
