"""celldx: malaria cell-image diagnosis and 3D cell reconstruction toolkit."""

__version__ = "0.1.0"
