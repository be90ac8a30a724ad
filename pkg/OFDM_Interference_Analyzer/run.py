#!/usr/bin/env python3
"""
Startup script for the OFDM Interference Analyzer
"""

import sys
from pathlib import Path


def check_requirements():
    """Check if all requirements are installed"""
    try:
        import numpy
        import scipy
        import pandas
        import langgraph
        import typer
        print("✅ All required packages are installed")
        return True
    except ImportError as e:
        print(f"❌ Missing required package: {e}")
        print("Please run: pip install -r requirements.txt")
        return False


def check_env_file():
    """Check if .env file exists"""
    env_file = Path(".env")
    if not env_file.exists():
        print("ℹ️  .env file not found, using the built-in DSL defaults")
        print("Copy .env.example to .env to change them")
        return False
    print("✅ .env file found")
    return True


def check_settings():
    """Check that the configured defaults are consistent"""
    from src.config.settings import settings

    try:
        settings.validate_config()
    except ValueError as e:
        print(f"❌ Invalid settings: {e}")
        return False
    return True


def main():
    """Main startup function"""
    print("🚀 Starting OFDM Interference Analyzer...")

    # Check requirements
    if not check_requirements():
        sys.exit(1)

    check_env_file()

    if not check_settings():
        sys.exit(1)

    from app import app

    # Hand the remaining arguments to the CLI
    try:
        app(args=sys.argv[1:], prog_name="ofdm-analyzer")
    except KeyboardInterrupt:
        print("\n👋 Stopped by user")
        sys.exit(130)


if __name__ == "__main__":
    main()
