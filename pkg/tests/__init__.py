"""cosetkit test suite."""
