import logging
import os
import sys

from dotenv import load_dotenv

# BLAS thread pools are sized when numpy loads, so this runs before any src import
load_dotenv()
if os.getenv("QINR_NUM_THREADS"):
    for variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(variable, os.environ["QINR_NUM_THREADS"])

from src.cli import run  # noqa: E402
from src.core.config import get_settings  # noqa: E402

settings = get_settings()


def configure_logging() -> None:
    logging.basicConfig(
        level=settings.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if settings.NUM_THREADS is not None:
        logging.getLogger(__name__).debug(f"BLAS threads pinned to {settings.NUM_THREADS}")


if __name__ == "__main__":
    configure_logging()
    sys.exit(run())
