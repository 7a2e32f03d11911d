"""floorflow: indoor airborne infection-risk simulation on 2D floor plans."""

__version__ = "0.1.0"
