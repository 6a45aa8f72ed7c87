"""
Repository modules for the ASSIST file formats.
"""

from .base import FileRepository
from .datasets import DatasetRepository
from .triplets import TripletRepository, MatrixRepository
from .models import ModelRepository
