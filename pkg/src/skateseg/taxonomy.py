"""Label universe for jump-procedure annotation.

Two hierarchy levels: SET labels carry the jump type only, ELEMENT labels
add the rotation count. Each level has six entry labels (one per jump
type), its jump labels, and a single shared landing label; background
frames carry NONE, which always gets id 0.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import DataFormatError, TaxonomyCountError, UnknownLabelError


class Level(enum.Enum):
    SET = "set"
    ELEMENT = "element"


class Category(enum.Enum):
    ENTRY = "entry"
    JUMP = "jump"
    LANDING = "landing"
    NONE = "none"


class JumpType(enum.Enum):
    AXEL = "Axel"
    SALCHOW = "Salchow"
    TOE_LOOP = "Toe Loop"
    LOOP = "Loop"
    FLIP = "Flip"
    LUTZ = "Lutz"


# Canonical ordering used everywhere labels are enumerated.
JUMP_TYPE_ORDER = (
    JumpType.AXEL, JumpType.SALCHOW, JumpType.TOE_LOOP,
    JumpType.LOOP, JumpType.FLIP, JumpType.LUTZ,
)

# Rotation counts per type in the default element-level universe: quads for
# the toe-pick and edge jumps, up to triple Axel (23 jump labels total).
DEFAULT_ROTATION_TABLE = {
    JumpType.AXEL: (1, 2, 3),
    JumpType.SALCHOW: (1, 2, 3, 4),
    JumpType.TOE_LOOP: (1, 2, 3, 4),
    JumpType.LOOP: (1, 2, 3, 4),
    JumpType.FLIP: (1, 2, 3, 4),
    JumpType.LUTZ: (1, 2, 3, 4),
}


@dataclass(frozen=True)
class Label:
    level: Level
    category: Category
    jump_type: JumpType | None = None
    rotations: int | None = None

    def __post_init__(self):
        if self.category in (Category.ENTRY, Category.JUMP):
            if self.jump_type is None:
                raise ValueError(f"{self.category.value} labels require a jump type")
        elif self.jump_type is not None:
            raise ValueError(f"{self.category.value} labels forbid a jump type")
        needs_rot = self.level is Level.ELEMENT and self.category is Category.JUMP
        if needs_rot:
            if self.rotations is None or self.rotations < 1:
                raise ValueError("element-level jump labels need rotations >= 1")
        elif self.rotations is not None:
            raise ValueError("rotations only allowed on element-level jump labels")

    @property
    def name(self) -> str:
        """Canonical display name ('Axel entry', '3 Axel jump', 'landing')."""
        if self.category is Category.NONE:
            return "NONE"
        if self.category is Category.LANDING:
            return "landing"
        if self.category is Category.ENTRY:
            return f"{self.jump_type.value} entry"
        if self.rotations is not None:
            return f"{self.rotations} {self.jump_type.value} jump"
        return f"{self.jump_type.value} jump"


def none_label(level: Level) -> Label:
    return Label(level=level, category=Category.NONE)


_TYPE_ALIASES = {}
for _jt in JumpType:
    _TYPE_ALIASES[_jt.value.lower()] = _jt
_TYPE_ALIASES["toeloop"] = JumpType.TOE_LOOP
_TYPE_ALIASES["toe-loop"] = JumpType.TOE_LOOP


def parse_label(name: str, level: Level) -> Label:
    """Parse a canonical label name at the given level.

    Accepts the spellings "Toe Loop", "Toeloop" and "ToeLoop" for the
    toe-pick loop jump. Raises UnknownLabelError for anything else.
    """
    text = " ".join(name.split())
    lowered = text.lower()
    if lowered == "none":
        return none_label(level)
    if lowered == "landing":
        return Label(level=level, category=Category.LANDING)
    rotations = None
    parts = lowered.split(" ")
    if parts and parts[0].isdigit():
        rotations = int(parts[0])
        parts = parts[1:]
    if len(parts) < 2 or parts[-1] not in ("entry", "jump"):
        raise UnknownLabelError(name)
    category = Category.ENTRY if parts[-1] == "entry" else Category.JUMP
    type_key = " ".join(parts[:-1])
    # "ToeLoop" arrives as one camel-case token
    jump_type = _TYPE_ALIASES.get(type_key) or _TYPE_ALIASES.get(type_key.replace(" ", ""))
    if jump_type is None:
        raise UnknownLabelError(name)
    if category is Category.ENTRY and rotations is not None:
        raise UnknownLabelError(name)
    if level is Level.SET and rotations is not None:
        raise UnknownLabelError(name)
    if level is Level.ELEMENT and category is Category.JUMP and rotations is None:
        raise UnknownLabelError(name)
    try:
        return Label(level=level, category=category,
                     jump_type=jump_type, rotations=rotations)
    except ValueError as exc:
        raise UnknownLabelError(name) from exc


def project_to_set(label: Label) -> Label:
    """Drop the rotation count, keeping category and jump type.

    Total: SET labels map to themselves, so applying this twice is the
    same as applying it once.
    """
    if label.level is Level.SET:
        return label
    return Label(level=Level.SET, category=label.category,
                 jump_type=label.jump_type, rotations=None)


@dataclass(frozen=True)
class LabelTaxonomy:
    """Ordered action-label universe for one level; NONE is implicit id 0."""

    level: Level
    labels: tuple[Label, ...]  # action labels only, excluding NONE

    def __post_init__(self):
        names = [lab.name for lab in self.labels]
        if len(set(names)) != len(names):
            raise ValueError("label names must be unique")
        for lab in self.labels:
            if lab.level is not self.level:
                raise ValueError("all labels must share the taxonomy level")
            if lab.category is Category.NONE:
                raise ValueError("NONE must not appear among action labels")

    @property
    def none_label(self) -> Label:
        return none_label(self.level)

    @property
    def n_action_labels(self) -> int:
        return len(self.labels)

    @property
    def n_labels(self) -> int:
        """Total label count including NONE."""
        return len(self.labels) + 1

    def label_for_id(self, idx: int) -> Label:
        if idx == 0:
            return self.none_label
        if not (1 <= idx <= len(self.labels)):
            raise UnknownLabelError(f"id {idx}")
        return self.labels[idx - 1]

    def id_for_label(self, label: Label) -> int:
        if label.category is Category.NONE:
            return 0
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise UnknownLabelError(label.name) from None

    def id_for_name(self, name: str, row: int | None = None) -> int:
        try:
            label = parse_label(name, self.level)
            return self.id_for_label(label)
        except UnknownLabelError:
            raise UnknownLabelError(name, row=row) from None

    def names(self) -> list[str]:
        """All label names in id order, NONE first."""
        return ["NONE"] + [lab.name for lab in self.labels]

    def to_dict(self) -> dict:
        return {"level": self.level.value,
                "labels": [lab.name for lab in self.labels]}

    @classmethod
    def from_dict(cls, d: dict) -> "LabelTaxonomy":
        try:
            level = Level(d["level"])
            labels = tuple(parse_label(n, level) for n in d["labels"])
        except (KeyError, ValueError, UnknownLabelError) as exc:
            raise DataFormatError(f"bad taxonomy: {exc}") from exc
        return cls(level=level, labels=labels)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LabelTaxonomy":
        return cls.from_dict(json.loads(text))


def build_taxonomy(level: Level,
                   rotation_table: dict[JumpType, tuple[int, ...]] | None = None,
                   allow_custom: bool = False) -> LabelTaxonomy:
    """Build the label universe for a level.

    SET gives 13 action labels (6 entries + 6 jumps + landing); ELEMENT
    gives 30 (6 entries + 23 rotation-qualified jumps + landing). Element
    jump labels come from ``rotation_table``; any table whose total jump
    count is not 23 is rejected unless ``allow_custom`` is set.
    """
    labels: list[Label] = []
    for jt in JUMP_TYPE_ORDER:
        labels.append(Label(level=level, category=Category.ENTRY, jump_type=jt))
    if level is Level.SET:
        for jt in JUMP_TYPE_ORDER:
            labels.append(Label(level=level, category=Category.JUMP, jump_type=jt))
    else:
        table = DEFAULT_ROTATION_TABLE if rotation_table is None else rotation_table
        n_jumps = sum(len(rots) for rots in table.values())
        if n_jumps != 23 and not allow_custom:
            raise TaxonomyCountError(
                f"element-level jump label count must be 23, got {n_jumps} "
                "(pass allow_custom=True for a custom universe)")
        for jt in JUMP_TYPE_ORDER:
            for rot in sorted(table.get(jt, ())):
                labels.append(Label(level=level, category=Category.JUMP,
                                    jump_type=jt, rotations=rot))
    labels.append(Label(level=level, category=Category.LANDING))
    return LabelTaxonomy(level=level, labels=tuple(labels))
