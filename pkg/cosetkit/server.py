"""
Server Module

HTTP surface for the registered commands, built on FastAPI and served with
Uvicorn.

Routes:
    GET  /                 health check and command names
    GET  /commands         command names, summaries and model schemas
    POST /command/{name}   run a command with a JSON request body
"""

from __future__ import annotations

import importlib
import logging
import sys
from typing import Any

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from .errors import CommandNotFoundError, CosetKitError, ErrorResponse
from .registry import CommandRegistry, get_registry

logger = logging.getLogger(__name__)

COMMAND_MODULES = ("cosetkit.commands",)


def load_command_modules(modules: tuple[str, ...] = COMMAND_MODULES) -> None:
    """
    Reset the registry and (re-)import the modules that register commands.

    Raises:
        ImportError: If a module cannot be imported.
    """
    CommandRegistry.reset()
    for module_name in modules:
        sys.modules.pop(module_name, None)
        importlib.import_module(module_name)
        logger.debug(f"Imported module: {module_name}")


def serialize_result(result: Any) -> Any:
    """JSON-ready form of a command result."""
    if isinstance(result, BaseModel):
        return result.model_dump(mode="json")
    if isinstance(result, list):
        return [serialize_result(item) for item in result]
    return result


def _type_name(type_hint: Any) -> str:
    return getattr(type_hint, "__name__", str(type_hint))


def create_app(
    title: str = "cosetkit",
    cors_origins: list[str] | None = None,
    debug: bool = False,
    load_commands: bool = True,
) -> FastAPI:
    """
    Build the FastAPI application.

    Args:
        title: API title for documentation.
        cors_origins: Allowed CORS origins. Defaults to ["*"].
        debug: Include exception text in 500 responses.
        load_commands: Import the built-in command modules first.
    """
    if load_commands:
        load_command_modules()

    app = FastAPI(title=title)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/")
    async def root() -> dict[str, Any]:
        """Health check endpoint."""
        return {
            "status": "ok",
            "service": title,
            "commands": list(get_registry().get_all_commands()),
        }

    @app.get("/commands")
    async def list_commands() -> dict[str, Any]:
        """List all registered commands and the schemas of the models they use."""
        registry = get_registry()
        return {
            "commands": [
                {
                    "name": cmd.name,
                    "summary": cmd.summary,
                    "request": cmd.request_model.model_json_schema(),
                    "response": _type_name(cmd.return_type),
                }
                for cmd in registry.get_all_commands().values()
            ],
            "models": {
                name: model.model_json_schema()
                for name, model in sorted(registry.get_all_models().items())
            },
        }

    @app.post("/command/{command_name}")
    async def execute_command(command_name: str, request: Request) -> dict[str, Any]:
        """Execute a command."""
        cmd = get_registry().get_command(command_name)
        if cmd is None:
            raise CommandNotFoundError(command_name)
        try:
            body = await request.json() if await request.body() else {}
        except ValueError as e:
            raise CosetKitError("VALIDATION_ERROR", f"Invalid JSON body: {e}") from e
        result = await run_in_threadpool(cmd.run, body)
        return {"result": serialize_result(result)}

    @app.exception_handler(CosetKitError)
    async def cosetkit_error_handler(request: Request, exc: CosetKitError) -> JSONResponse:
        status_code = 404 if isinstance(exc, CommandNotFoundError) else 400
        return JSONResponse(status_code=status_code, content=exc.to_dict())

    @app.exception_handler(PydanticValidationError)
    async def validation_error_handler(
        request: Request, exc: PydanticValidationError
    ) -> JSONResponse:
        error = ErrorResponse(
            code="VALIDATION_ERROR",
            message="Request validation failed",
            details=exc.errors(include_url=False, include_context=False),
        )
        return JSONResponse(status_code=400, content=error.model_dump(mode="json"))

    @app.exception_handler(Exception)
    async def general_error_handler(request: Request, exc: Exception) -> JSONResponse:
        logger.exception("Unhandled exception")
        error = ErrorResponse(
            code="INTERNAL_ERROR",
            message=str(exc) if debug else "An internal error occurred",
        )
        return JSONResponse(status_code=500, content=error.model_dump(mode="json", exclude_none=True))

    return app


def serve(host: str = "127.0.0.1", port: int = 8000, debug: bool = False) -> None:
    """Run the HTTP server under Uvicorn."""
    import uvicorn

    app = create_app(debug=debug)
    logger.info(f"Serving {len(get_registry().get_all_commands())} commands on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="debug" if debug else "info")
