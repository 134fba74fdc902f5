#!/usr/bin/env python3
"""
Volterra Lab
Main entry point for the command-line application
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.cli.main import main as cli_main

def main() -> None:
    """Main entry point"""
    sys.exit(cli_main())

if __name__ == "__main__":
    main()
