"""Run configuration and the loaded-resource bundle shared by service and CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .kb import KnowledgeBase, load_kb
from .lexicon import build_gazetteer, load_aliases, load_pos_lexicon, load_triggers
from .rewriting import load_dictionary
from .templates import TemplatePairDB, load_template_db


@dataclass
class Config:
    kb_path: str | None = None
    pos_path: str | None = None
    aliases_path: str | None = None
    triggers_path: str | None = None
    dict_path: str | None = None
    template_db_path: str | None = None
    model_path: str | None = None
    beam: int = 200
    kd: int = 100
    kt: int = 100
    epochs: int = 3
    threshold: int = 3
    base_rate: float = 1.0
    epsilon: float = 1e-8
    rerank_weight: float = 10.0
    max_depth: int = 6

    def __post_init__(self):
        for name in ("beam", "kd", "kt", "epochs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")
        if self.base_rate <= 0 or self.epsilon <= 0:
            raise ValueError("base_rate and epsilon must be positive")

    def validate_paths(self):
        for name in ("kb_path", "pos_path", "aliases_path", "triggers_path",
                     "dict_path", "template_db_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ParseError(f"{name} does not exist", path)


@dataclass
class Resources:
    kb: KnowledgeBase
    pos_lexicon: dict[str, str] = field(default_factory=dict)
    gazetteer: dict[str, str] = field(default_factory=dict)
    triggers: dict = field(default_factory=dict)
    dictionary: dict[str, tuple[str, ...]] | None = None
    template_db: TemplatePairDB | None = None

    @classmethod
    def load(cls, config: Config) -> "Resources":
        config.validate_paths()
        kb = load_kb(config.kb_path) if config.kb_path else KnowledgeBase([])
        pos_lexicon = load_pos_lexicon(config.pos_path) if config.pos_path else {}
        aliases = load_aliases(config.aliases_path) if config.aliases_path else {}
        gazetteer = build_gazetteer(kb, aliases)
        triggers = load_triggers(config.triggers_path, kb) if config.triggers_path else {}
        dictionary = load_dictionary(config.dict_path) if config.dict_path else None
        template_db = load_template_db(config.template_db_path) if config.template_db_path else None
        return cls(
            kb=kb,
            pos_lexicon=pos_lexicon,
            gazetteer=gazetteer,
            triggers=triggers,
            dictionary=dictionary,
            template_db=template_db,
        )
