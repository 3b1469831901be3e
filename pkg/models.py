from typing import Any, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

# --- Verification ---

ViolationKind = Literal[
    "uncovered-pair",
    "over-covered-pair",
    "bad-uniformity",
    "bad-group-meet",
    "duplicate-block",
    "out-of-range",
    "wrong-size",
    # cycle certificates
    "bad-join",
    "not-alternating",
    "not-hamiltonian",
    "not-colorful",
    # ucycle windows
    "malformed-window",
]


class Violation(BaseModel):
    kind: ViolationKind
    detail: str
    witness: List[Any] = []


class VerificationReport(BaseModel):
    violations: List[Violation] = []
    minimum: Optional[bool] = None
    group_type: Optional[str] = None
    colorful: Optional[bool] = None

    @computed_field
    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, kind: ViolationKind, detail: str, witness: Optional[List[Any]] = None) -> None:
        self.violations.append(Violation(kind=kind, detail=detail, witness=list(witness or [])))

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.violations.extend(other.violations)
        for field in ("minimum", "group_type", "colorful"):
            if getattr(other, field) is not None:
                setattr(self, field, getattr(other, field))
        return self

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def summary(self, limit: int = 10) -> str:
        if self.valid:
            return "valid"
        lines = [f"invalid ({len(self.violations)} violations)"]
        lines += [f"  {v.kind}: {v.detail}" for v in self.violations[:limit]]
        if len(self.violations) > limit:
            lines.append(f"  ... {len(self.violations) - limit} more")
        return "\n".join(lines)


# --- Search ---

class SearchParams(BaseModel):
    seed: int = Field(default=0, ge=0)
    max_iterations: int = Field(default=2_000_000, gt=0)
    stall_limit: Optional[int] = Field(default=None, gt=0, description="None means stall_factor * m")
    restarts: int = Field(default=50, gt=0)
    time_limit: float = Field(default=60.0, gt=0)
    threads: int = Field(default=1, gt=0)


class SearchResult(BaseModel):
    success: bool
    n: int
    k: int
    length: int
    sequence: Optional[List[int]] = None
    best_defect: int
    iterations: int = 0
    restarts: int = 0
    seed: int
    elapsed: float = 0.0
    monotone_epochs: bool = True
    trajectory: List[int] = Field(default_factory=list, description="best defect after each epoch")


# --- Tables ---

class TableRow(BaseModel):
    n: int
    lower_L: int
    len_this: int
    gilkerson: str
    achieved: Optional[int] = None
    jl_actual: Optional[int] = None
    f2_known: Optional[str] = None

    @field_validator("n")
    @classmethod
    def _order(cls, v: int) -> int:
        if v < 3:
            raise ValueError("table rows start at n = 3")
        return v
