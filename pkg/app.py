#!/usr/bin/env python3
"""
TRS - Entry Point
Topological representative subgraph selection toolkit

    python app.py select --subgraphs patterns.gspan --k 50 --seed 7
"""
from flask.cli import FlaskGroup

from app import create_app

cli = FlaskGroup(create_app=create_app, add_default_commands=False)

if __name__ == '__main__':
    cli()
