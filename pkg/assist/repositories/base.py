"""
Base repository for ASSIST file formats.
"""

import os
from typing import Dict, Generic, Optional, Type, TypeVar

from ..entities import ResponseScale
from ..exceptions import ValidationException
from ..file_client import FileClient
from ..utils.converters import format_number

T = TypeVar("T")

# Header fields carrying a response scale.
SCALE_KEYS = ("shift", "span")


def scale_fields(scale: ResponseScale) -> str:
    """Header fields ``shift=<> span=<>`` written with round-trip precision."""
    return f"shift={format_number(scale.shift)} span={format_number(scale.span)}"


def stored_scale(header: Dict[str, float]) -> Optional[ResponseScale]:
    """
    Response scale stored in a parsed header.

    Returns:
        ResponseScale, or None when the header carries no scale

    Raises:
        ValidationException: When only one field is present or the span is not positive
    """
    present = [key for key in SCALE_KEYS if key in header]
    if not present:
        return None
    if len(present) != len(SCALE_KEYS):
        raise ValidationException(f"header carries {present[0]} without its partner")
    return ResponseScale(header["shift"], header["span"])


class FileRepository(Generic[T]):
    """Base repository persisting one entity type in one file format."""

    def __init__(self, file_client: FileClient, entity_name: str, entity_class: Type[T]):
        """
        Initialize file repository.

        Args:
            file_client: File client instance
            entity_name: Name of the format, used in log and error messages
            entity_class: Entity class
        """
        self.file_client = file_client
        self.entity_name = entity_name
        self.entity_class = entity_class

    def load(self, path: str) -> T:
        """
        Load an entity from a file.

        Args:
            path: File path

        Returns:
            Entity instance

        Raises:
            DecodeException: When the file is malformed
        """
        raise NotImplementedError

    def save(self, entity: T, path: str) -> None:
        """
        Save an entity to a file, replacing any existing content.

        Args:
            entity: Entity instance
            path: File path
        """
        raise NotImplementedError

    def exists(self, path: str) -> bool:
        """Whether a file exists at the path."""
        return os.path.isfile(path)
