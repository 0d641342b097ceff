__version__ = "0.1.0"

__all__ = [
    "asymptotics",
    "cli",
    "config",
    "containment",
    "estimators",
    "interval",
    "models",
    "numerics",
    "services",
    "solver",
    "utils",
    "var_unknown",
]
