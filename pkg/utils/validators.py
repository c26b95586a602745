"""
Schema validation and JSON sanitizing

Every document entering or leaving the tool passes through here
"""

from typing import Type, Dict, Any, TypeVar
try:
    from pydantic.v1 import BaseModel, ValidationError
except ImportError:
    from pydantic import BaseModel, ValidationError
import dataclasses
import json
import logging
from enum import Enum
from fractions import Fraction

logger = logging.getLogger(__name__)

T = TypeVar('T', bound=BaseModel)


def validate_json_schema(data: Dict[str, Any], schema_class: Type[T]) -> T:
    """
    Validate dictionary against Pydantic schema

    Args:
        data: Dictionary to validate
        schema_class: Pydantic model class to validate against

    Returns:
        The validated model

    Raises:
        ValueError: If validation fails, listing every offending field
    """
    if not isinstance(data, dict):
        error_msg = f"Validation failed for {schema_class.__name__}: expected an object, got {type(data).__name__}"
        logger.error(error_msg)
        raise ValueError(error_msg)

    try:
        return schema_class(**data)

    except ValidationError as e:
        errors = []
        for error in e.errors():
            field = '.'.join(str(x) for x in error['loc'])
            errors.append(f"{field}: {error['msg']}")

        error_msg = f"Validation failed for {schema_class.__name__}: " + "; ".join(errors)
        logger.error(error_msg)

        raise ValueError(error_msg)


def sanitize_for_json(obj: Any) -> Any:
    """
    Recursively convert an object into JSON-safe values

    Handles:
    - Fraction -> {"num": .., "den": ..}
    - tuples and sets -> lists (sets sorted)
    - dataclasses and pydantic models -> dicts
    - enums -> their value
    - dict keys -> strings
    """
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}

    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj

    elif isinstance(obj, Enum):
        return obj.value

    elif isinstance(obj, dict):
        return {str(sanitize_for_json(k)): sanitize_for_json(v) for k, v in obj.items()}

    elif isinstance(obj, (list, tuple)):
        return [sanitize_for_json(item) for item in obj]

    elif isinstance(obj, (set, frozenset)):
        return [sanitize_for_json(item) for item in sorted(obj)]

    elif isinstance(obj, float):
        # NaN and infinities have no JSON form
        if obj != obj or obj in (float('inf'), float('-inf')):
            return None
        return obj

    elif isinstance(obj, BaseModel):
        return sanitize_for_json(obj.dict())

    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return sanitize_for_json({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})

    else:
        try:
            json.dumps(obj)
            return obj
        except (TypeError, ValueError):
            # numpy scalars and the like
            if hasattr(obj, 'item'):
                return sanitize_for_json(obj.item())
            return str(obj)


# Example usage
if __name__ == "__main__":
    from models.schemas import PassengerSpec

    try:
        print(validate_json_schema({"id": 1, "bid": 14, "max_pickup_time": 900, "max_travel_time": 600}, PassengerSpec))
    except ValueError as e:
        print(f"Validation failed: {e}")

    try:
        validate_json_schema({"id": 0, "bid": -1, "max_pickup_time": 900}, PassengerSpec)
    except ValueError as e:
        print(f"\nExpected validation error: {e}")

    print(sanitize_for_json({1: Fraction(20, 3), "members": (1, 2)}))
