"""
TRS Application Factory
"""
import logging
from collections.abc import Mapping

from flask import Flask
from dotenv import load_dotenv

from app.config import DEFAULT_SETTINGS

load_dotenv()


def create_app(config_object=None):
    """
    Application factory for the TRS toolkit.
    No HTTP routes: the app carries config, the cache extension and the CLI.
    """
    app = Flask(__name__, static_folder=None)

    app.config.from_mapping(DEFAULT_SETTINGS)
    app.config.from_prefixed_env("TRS")

    if config_object:
        if isinstance(config_object, Mapping):
            app.config.from_mapping(config_object)
        else:
            app.config.from_object(config_object)

    logging.basicConfig(
        level=str(app.config.get("LOG_LEVEL", "INFO")).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    from app.utils.cache import init_cache
    init_cache(app)

    # Register command blueprints
    from app.blueprints.graphs import bp as graphs_bp
    from app.blueprints.selection import bp as selection_bp
    from app.blueprints.evaluation import bp as evaluation_bp

    app.register_blueprint(graphs_bp)
    app.register_blueprint(selection_bp)
    app.register_blueprint(evaluation_bp)

    app.logger.debug("Registered command blueprints: graphs, selection, evaluation")

    return app
