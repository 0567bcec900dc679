import os
from pydantic import BaseModel, Field


class Settings(BaseModel):
    """
    Runtime settings, read from the environment (``.env`` is loaded by the package).

    Args:
        threads (int): Worker threads for enumeration; 0 means one per CPU.
        log_level (str): Logging level name.
        block_size (int): Base points examined per block in first-witness searches.
    """
    threads: int = Field(0, ge=0, description="Worker threads for enumeration; 0 means one per CPU.")
    log_level: str = Field("WARNING", description="Logging level name.")
    block_size: int = Field(4096, ge=1, description="Base points examined per block in first-witness searches.")

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            threads=int(os.getenv("RAINBOWFQ_THREADS", "0")),
            log_level=os.getenv("RAINBOWFQ_LOG_LEVEL", "WARNING"),
            block_size=int(os.getenv("RAINBOWFQ_BLOCK_SIZE", "4096")),
        )


def resolve_workers(threads: int) -> int:
    """Map a thread-count setting to a concrete worker count (0 = auto)."""
    if threads < 0:
        raise ValueError("threads must be non-negative")
    return threads or os.cpu_count() or 1
