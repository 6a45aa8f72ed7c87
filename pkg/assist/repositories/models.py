"""
Model repository: versioned JSON persistence of fitted models.
"""

from typing import Union

from .base import FileRepository
from ..constants import MODEL_SCHEMA, MODEL_VERSION
from ..entities import CompletionModel, SignSeriesModel
from ..exceptions import AssistException, DecodeException, SchemaVersionException
from ..file_client import FileClient

Model = Union[SignSeriesModel, CompletionModel]

MODEL_KINDS = {
    "sign-series": SignSeriesModel,
    "completion": CompletionModel,
}


class ModelRepository(FileRepository[Model]):
    """Repository for SignSeriesModel and CompletionModel files."""

    def __init__(self, file_client: FileClient):
        """
        Initialize model repository.

        Args:
            file_client: File client instance
        """
        super().__init__(file_client, "model", SignSeriesModel)

    def to_document(self, model: Model) -> dict:
        """
        Encode a model as a JSON-compatible document.

        Args:
            model: Fitted model

        Returns:
            Document with schema, version, kind and the model body
        """
        kind = next(name for name, cls in MODEL_KINDS.items() if isinstance(model, cls))
        return {
            "schema": MODEL_SCHEMA,
            "version": MODEL_VERSION,
            "kind": kind,
            "model": model.to_dict(),
        }

    def from_document(self, document: dict, path: str = None) -> Model:
        """
        Decode a model document.

        Args:
            document: Decoded JSON object
            path: Source file for error messages

        Returns:
            Fitted model

        Raises:
            SchemaVersionException: When the schema or version is not supported
            DecodeException: When the body is truncated or corrupted
        """
        if document.get("schema") != MODEL_SCHEMA:
            raise DecodeException(f"not an {MODEL_SCHEMA} document (schema={document.get('schema')!r})", path)
        if document.get("version") != MODEL_VERSION:
            raise SchemaVersionException(
                f"unsupported model version {document.get('version')!r}, expected {MODEL_VERSION}", path
            )
        model_class = MODEL_KINDS.get(document.get("kind"))
        if model_class is None:
            raise DecodeException(f"unknown model kind {document.get('kind')!r}", path)
        body = document.get("model")
        if not isinstance(body, dict):
            raise DecodeException("model body is missing", path)
        try:
            return model_class.from_dict(body)
        except AssistException as e:
            raise DecodeException(f"corrupted model body: {e.error_message}", path)
        except (KeyError, TypeError, ValueError) as e:
            raise DecodeException(f"corrupted model body: {e}", path)

    def load(self, path: str) -> Model:
        """
        Load a fitted model.

        Args:
            path: File path

        Returns:
            SignSeriesModel or CompletionModel
        """
        return self.from_document(self.file_client.read_json(path), path)

    def save(self, entity: Model, path: str) -> None:
        """
        Save a fitted model.

        Args:
            entity: Fitted model
            path: File path
        """
        self.file_client.write_json(path, self.to_document(entity))
