"""Perception, evaluation, and navigation toolkit for indoor mobile robots.

Subpackages by capability:

- :mod:`indoornav.geometry` - SE(3) poses and rigid least-squares alignment
- :mod:`indoornav.dataset_io` - trajectory/detection/image file formats
- :mod:`indoornav.flow` - corner detection and sparse pyramidal flow tracking
- :mod:`indoornav.dynamic_detect` - moving-object decision and mask emission
- :mod:`indoornav.metrics` - relative and absolute trajectory error reports
- :mod:`indoornav.planning` - grid search and polar-histogram steering
- :mod:`indoornav.simulation` - deterministic differential-drive world
- :mod:`indoornav.synthetic` - seeded fixture generators
- :mod:`indoornav.cli` - command line front end
"""

__version__ = "0.1.0"
