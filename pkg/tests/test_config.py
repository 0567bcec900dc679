import pytest
from pydantic import ValidationError

from rainbowfq import create_app
from rainbowfq.config import Settings, resolve_workers
from rainbowfq.error_models import ErrorResponse, error_response
from rainbowfq.field import NotPrime


def test_settings_from_env(monkeypatch):
    """Test settings are read from RAINBOWFQ_* variables."""
    monkeypatch.setenv("RAINBOWFQ_THREADS", "3")
    monkeypatch.setenv("RAINBOWFQ_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("RAINBOWFQ_BLOCK_SIZE", "64")
    settings = Settings.from_env()
    assert (settings.threads, settings.log_level, settings.block_size) == (3, "DEBUG", 64)


def test_settings_defaults(monkeypatch):
    """Test defaults when the environment is empty."""
    for name in ("RAINBOWFQ_THREADS", "RAINBOWFQ_LOG_LEVEL", "RAINBOWFQ_BLOCK_SIZE"):
        monkeypatch.delenv(name, raising=False)
    assert create_app() == Settings()


def test_settings_validation():
    """Test negative thread counts and empty blocks are rejected."""
    with pytest.raises(ValidationError):
        Settings(threads=-1)
    with pytest.raises(ValidationError):
        Settings(block_size=0)


def test_resolve_workers():
    """Test 0 means auto and explicit counts pass through."""
    assert resolve_workers(0) >= 1
    assert resolve_workers(5) == 5
    with pytest.raises(ValueError):
        resolve_workers(-2)


def test_error_response():
    """Test errors map to code and detail."""
    payload = error_response(NotPrime("p=4 is not prime"))
    assert type(payload) is ErrorResponse
    assert payload.model_dump() == {"detail": "p=4 is not prime", "code": "not_prime"}
    assert NotPrime.exit_code == 3
