from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"
HYPOTHESIS_VIOLATED = "HYPOTHESIS_VIOLATED"

EXIT_CODES = {PASS: 0, FAIL: 1, HYPOTHESIS_VIOLATED: 1, INCONCLUSIVE: 2}


def qstr(q: Fraction) -> str:
    """Exact ``num/den`` text for a rational."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass
class Report:
    check: str
    status: str
    details: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        return {"check": self.check, "status": self.status,
                "summary": self.summary, "details": self.details}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)
