#!/usr/bin/env python3
"""
Command-line entry point.

    python run.py synth --out data/synth --sequences 50
    python run.py train --data data/synth --out runs/toy --epochs 2
    python run.py eval --data data/synth --checkpoint runs/toy/best.spk
"""

from spike.cli import main

if __name__ == '__main__':
    main()
