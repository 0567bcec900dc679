import logging


def setup_logging(level: str = "WARNING"):
    """
    Set up logging configuration for the package.

    Log records go to standard error; standard output is reserved for reports.
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s %(threadName)s : %(message)s'
    )
