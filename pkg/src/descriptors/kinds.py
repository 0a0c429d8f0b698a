from enum import Enum


class DescriptorKind(str, Enum):
    """The four emotion-correlated acoustic descriptors."""

    SPECTRAL_CENTROID = "spectral_centroid"
    SPECTRAL_KURTOSIS = "spectral_kurtosis"
    LOUDNESS = "loudness"
    DELTA_F0 = "delta_f0"

    @property
    def needs_f0(self) -> bool:
        return self is DescriptorKind.DELTA_F0

    @classmethod
    def parse(cls, value: "str | DescriptorKind") -> "DescriptorKind":
        if isinstance(value, DescriptorKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError as e:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"Unknown descriptor kind {value!r} (expected one of {names})") from e


ALL_KINDS: tuple[DescriptorKind, ...] = tuple(DescriptorKind)
