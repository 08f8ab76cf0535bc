import dataclasses
import pprint
import typing

import numpy as np

T = typing.TypeVar('T')


class Model:
    """Mixin for dataclass models: dict round trips and readable repr"""

    # attribute names holding numpy arrays, restored by from_dict
    array_fields: typing.ClassVar[typing.Tuple[str, ...]] = ()

    @classmethod
    def from_dict(cls: typing.Type[T], dikt) -> T:
        """Returns the dict as a model"""
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in dikt:
                continue
            value = dikt[f.name]
            if f.name in cls.array_fields and value is not None:
                value = np.asarray(value, dtype=float)
            kwargs[f.name] = value
        return cls(**kwargs)

    def to_dict(self):
        """Returns the model properties as a dict

        :rtype: dict
        """
        result = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                result[f.name] = value.tolist()
            elif isinstance(value, np.generic):
                result[f.name] = value.item()
            elif isinstance(value, list):
                result[f.name] = [x.to_dict() if hasattr(x, "to_dict") else x for x in value]
            elif hasattr(value, "to_dict"):
                result[f.name] = value.to_dict()
            elif isinstance(value, dict):
                result[f.name] = {k: (v.to_dict() if hasattr(v, "to_dict") else v)
                                  for k, v in value.items()}
            else:
                result[f.name] = value
        return result

    def to_str(self):
        """Returns the string representation of the model

        :rtype: str
        """
        return pprint.pformat(self.to_dict())

    def __repr__(self):
        """For `print` and `pprint`"""
        return self.to_str()
