"""
Entry point for running chromacomm as a module
Usage: python -m chromacomm
"""
from .cli import main

if __name__ == "__main__":
    main()
