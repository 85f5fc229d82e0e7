"""
Diffusion Segmentation Lab - Main Entry Point

Seeded graph-diffusion segmentation from the command line.
"""

import os
import sys

from dotenv import load_dotenv

from diffusion_seg.cli import cli_dispatch
from diffusion_seg.utils.logger import DiffusionLogger, get_logger

# Load environment variables from .env file
load_dotenv()

# Initialize logging system
log_level = os.getenv("LOG_LEVEL", "WARNING")
log_file = os.getenv("LOG_FILE", None)
DiffusionLogger.setup(level=log_level, log_file=log_file, force=True)

logger = get_logger("main")


def main():
    """Run one diffusion-seg subcommand"""
    logger.debug(f"Python path: {sys.executable}")
    logger.debug(f"Working directory: {os.getcwd()}")
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
