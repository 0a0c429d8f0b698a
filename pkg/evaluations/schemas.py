from pydantic import BaseModel, Field

from src.audio.manifest import normalize_emotion

# Column order of the summary table.
TABLE_COLUMNS: tuple[str, ...] = ("acc_orig", "acc_svm", "embedding_mae", "pcc", "cer", "eer")
PAIR_COLUMNS: tuple[str, ...] = ("acc_orig", "acc_svm", "embedding_mae", "pcc", "cer")


class ConversionPair(BaseModel):
    """One (source, converted) utterance pair of an evaluation corpus."""

    pair_id: str
    source_path: str
    converted_path: str
    source_speaker: str
    target_speaker: str
    emotion_label: str | None = Field(default=None, description="Emotion of the source")
    transcript: str | None = Field(default=None, description="Reference text of the source")
    source_gender: str | None = None
    target_gender: str | None = None
    source_accent: str | None = None
    target_accent: str | None = None

    def model_post_init(self, __context) -> None:
        self.emotion_label = normalize_emotion(self.emotion_label)

    @property
    def gender_group(self) -> str | None:
        if self.source_gender is None or self.target_gender is None:
            return None
        return "same_gender" if self.source_gender == self.target_gender else "different_gender"

    @property
    def accent_group(self) -> str | None:
        if self.source_accent is None or self.target_accent is None:
            return None
        return f"{self.source_accent}→{self.target_accent}"

    def groups(self) -> list[str]:
        keys = ["all"]
        for key in (self.emotion_label, self.gender_group, self.accent_group):
            if key is not None:
                keys.append(key)
        return keys


class PairMetrics(BaseModel):
    """Per-pair metric record; ``None`` means the metric was not computable for this pair."""

    pair_id: str
    groups: list[str] = Field(default_factory=list)
    pcc: float | None = None
    pcc_flagged: bool = Field(default=False, description="Too few jointly voiced frames")
    joint_voiced_frames: int = 0
    embedding_mae: float | None = None
    cer: float | None = None
    acc_orig: float | None = Field(default=None, description="1 if the SVM matches the label")
    acc_svm: float | None = Field(default=None, description="1 if SVM(conv) == SVM(source)")
    svm_source: str | None = None
    svm_converted: str | None = None
    hypothesis: str | None = None


class ColumnStats(BaseModel):
    mean: float
    std: float
    n: int = Field(ge=1)


class GroupRow(BaseModel):
    """Aggregates of one group; a column is ``None`` when no member has a value."""

    group: str
    n_pairs: int = Field(ge=0)
    columns: dict[str, ColumnStats | None] = Field(default_factory=dict)


class MetricReport(BaseModel):
    pairs: list[PairMetrics] = Field(default_factory=list)
    groups: dict[str, GroupRow | None] = Field(default_factory=dict)
    eer: float | None = None
    genuine_scores: list[float] = Field(default_factory=list)
    impostor_scores: list[float] = Field(default_factory=list)
