"""
Entity base class for ASSIST domain types.
"""

from __future__ import annotations

import inspect
import sys
import types
from dataclasses import fields
from enum import Enum
from functools import lru_cache
from typing import Any, ClassVar, Dict, Type, TypeVar, Union, get_args, get_origin, get_type_hints

import numpy as np

from ...exceptions import ValidationException
from ...utils.converters import to_jsonable

_UNION_TYPES = (Union,)
if hasattr(types, "UnionType"):
    _UNION_TYPES = _UNION_TYPES + (types.UnionType,)  # type: ignore[assignment]


def _get_resolved_type_hints(cls: Type) -> Dict[str, Any]:
    """Return cached typing hints for the provided class."""
    module_dict = sys.modules[cls.__module__].__dict__
    base_module_dict = sys.modules[Entity.__module__].__dict__
    combined_globals = {**base_module_dict, **module_dict}
    return get_type_hints(cls, globalns=combined_globals, localns=combined_globals)


_get_resolved_type_hints = lru_cache(maxsize=None)(_get_resolved_type_hints)


T = TypeVar("T", bound="Entity")


class Entity:
    """
    Mixin for dataclass entities with dictionary round trips.

    Subclasses are (frozen) dataclasses. Array fields are written as nested
    lists and restored as float arrays; enum fields as their values; nested
    entities recursively. ``field_aliases`` renames fields on the wire.
    """

    field_aliases: ClassVar[Dict[str, str]] = {}

    @classmethod
    def _convert_field_value(cls, annotation, value):
        """Convert a decoded value into arrays, enums or entities per its annotation."""
        if value is None:
            return None

        origin = get_origin(annotation)

        if origin in _UNION_TYPES:
            non_none_args = [arg for arg in get_args(annotation) if arg is not type(None)]
            if len(non_none_args) == 1:
                return cls._convert_field_value(non_none_args[0], value)
            return value

        if origin in (list, tuple):
            if not isinstance(value, (list, tuple)):
                return value
            item_args = get_args(annotation)
            item_type = item_args[0] if item_args else Any
            converted = [cls._convert_field_value(item_type, item) for item in value]
            return tuple(converted) if origin is tuple else converted

        if annotation is np.ndarray:
            return np.array(value, dtype=np.float64)

        if inspect.isclass(annotation):
            if issubclass(annotation, Entity):
                if isinstance(value, annotation):
                    return value
                if isinstance(value, dict):
                    return annotation.from_dict(value)
                return value
            if issubclass(annotation, Enum):
                return annotation(value)

        return value

    def to_dict(self) -> Dict:
        """
        Convert the entity to a JSON-compatible dictionary.

        Returns:
            Dict representation of the entity
        """
        data = {}
        for field in fields(self):
            value = getattr(self, field.name)
            if isinstance(value, Entity):
                value = value.to_dict()
            elif isinstance(value, (list, tuple)) and value and isinstance(value[0], Entity):
                value = [item.to_dict() for item in value]
            data[self.field_aliases.get(field.name, field.name)] = to_jsonable(value)
        return data

    @classmethod
    def from_dict(cls: Type[T], data: Dict) -> T:
        """
        Create an entity from a dictionary.

        Args:
            data: Dictionary as produced by to_dict

        Returns:
            A new entity instance

        Raises:
            ValidationException: When data is empty
        """
        if not data:
            raise ValidationException(f"Cannot build {cls.__name__} from empty data")

        reverse_aliases = {wire: name for name, wire in cls.field_aliases.items()}
        type_hints = _get_resolved_type_hints(cls)
        known_fields = {f.name for f in fields(cls) if f.init}
        kwargs = {}
        for key, value in data.items():
            name = reverse_aliases.get(key, key)
            if name not in known_fields:
                continue
            kwargs[name] = cls._convert_field_value(type_hints.get(name, Any), value)
        return cls(**kwargs)
