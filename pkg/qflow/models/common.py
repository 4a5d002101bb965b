from typing import Annotated, Any, Type, TypeVar

import numpy as np
from pydantic import BaseModel, PlainSerializer, PlainValidator, ValidationError

from qflow.core.errors import QflowError, SpecValidationError
from qflow.utils.serialization import decode_matrix, encode_matrix

# Complex matrix field: accepts nested [re, im] pairs or plain reals, always dumps [re, im] pairs
Matrix = Annotated[np.ndarray, PlainValidator(decode_matrix), PlainSerializer(encode_matrix, return_type=list)]

ModelT = TypeVar("ModelT", bound=BaseModel)


def format_location(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_document(model: Type[ModelT], data: Any, source: str = "document") -> ModelT:
    """Validate ``data`` against ``model``; failures name the offending field."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        errors = e.errors()
        first = errors[0] if errors else {}
        where = format_location(first.get("loc", ()))
        message = f"{source}: field '{where}': {first.get('msg', 'invalid value')}"
        detail = "; ".join(f"{format_location(err.get('loc', ()))}: {err.get('msg')}" for err in errors[1:]) or None
        raise SpecValidationError(message, detail=detail)
    except QflowError as e:
        # Matrix decoding raises our own errors from inside the validators
        raise SpecValidationError(f"{source}: {e.message}", detail=e.detail)
