"""Main entry point for Dualplan."""
import sys
import logging
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr),  # Console output; stdout carries command results
    ]
)
logger = logging.getLogger(__name__)

from src.harness.cli import cli


def main():
    """Run one Dualplan command and exit with its status."""
    logger.debug(f"argv: {sys.argv[1:]}")
    sys.exit(cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
