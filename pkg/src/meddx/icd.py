"""ICD-10 code syntax: one letter, two digits, optional dotted suffix."""
from __future__ import annotations

import re
from dataclasses import dataclass

# Letter + two digits, then optionally "." and 1-3 alphanumeric characters.
# At most six significant characters in total, the dot not counted.
_CODE_RE = re.compile(r"^[A-Z][0-9]{2}(\.[0-9A-Z]{1,3})?$")


class InvalidIcdCode(ValueError):
    """Raised for text that does not follow ICD-10 code syntax."""


@dataclass(frozen=True, order=True)
class IcdCode:
    """A syntactically valid ICD-10 code such as ``J00`` or ``R22.0``.

    Only the code *shape* is checked; whether the code is assigned in the
    official classification is knowledge-pack content, not a type concern.
    """

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise InvalidIcdCode("ICD code must be nonempty")
        if not _CODE_RE.match(self.text):
            raise InvalidIcdCode(
                f"invalid ICD-10 code {self.text!r}: expected a letter, two digits "
                "and an optional dotted suffix of up to three characters"
            )

    def __str__(self) -> str:
        return self.text


def is_valid_code(text: str) -> bool:
    """True if `text` parses as an ICD-10 code."""
    return bool(_CODE_RE.match(text))
