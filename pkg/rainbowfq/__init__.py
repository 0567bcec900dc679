import logging
from typing import Optional
from dotenv import load_dotenv
from .config import Settings
from .log_config import setup_logging

load_dotenv()

__version__ = "1.0.0"


def create_app(settings: Optional[Settings] = None) -> Settings:
    """
    Application factory for the rainbowfq toolkit.

    Args:
        settings (Optional[Settings]): Explicit settings; read from the environment when omitted.

    Returns:
        Settings: The resolved settings, with logging configured.
    """
    settings = settings or Settings.from_env()
    setup_logging(settings.log_level)
    logging.getLogger(__name__).info(f"rainbowfq {__version__} starting up.")
    return settings
