from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import Config, config as default_config


KernelKind = Literal["linear", "polynomial", "gaussian"]
BackendName = Literal["classical", "quantum-exact", "quantum-shots"]


class KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: KernelKind = Field(..., description="Kernel family")
    degree: Optional[int] = Field(None, ge=1, description="Polynomial degree d (polynomial only)")
    sigma: Optional[float] = Field(None, gt=0, description="Gaussian scale σ in exp(-σ|x-y|^2) (gaussian only)")

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == "polynomial" and (self.degree is None or self.sigma is not None):
            raise ValueError("polynomial kernel takes exactly a degree")
        if self.kind == "gaussian" and (self.sigma is None or self.degree is not None):
            raise ValueError("gaussian kernel takes exactly a sigma")
        if self.kind == "linear" and (self.degree is not None or self.sigma is not None):
            raise ValueError("linear kernel takes no parameters")
        return self

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(kind="linear")

    @classmethod
    def polynomial(cls, degree: int) -> "KernelSpec":
        return cls(kind="polynomial", degree=degree)

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(kind="gaussian", sigma=sigma)

    def describe(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial(d={self.degree})"
        if self.kind == "gaussian":
            return f"gaussian(sigma={self.sigma:g})"
        return "linear"


class TrainConfig(BaseModel):
    gamma: float = Field(1.0, gt=0, description="Regularization weight γ (alias Υ, ζ)")
    jitter: float = Field(1e-10, ge=0, lt=1e-6, description="Diagonal jitter for ill-conditioned systems")
    sv_threshold: float = Field(1e-8, ge=0, description="|α_i| above this counts as a support vector")
    condition_limit: float = Field(1e12, gt=1, description="Condition estimate that triggers jitter")
    contour_level: float = Field(0.5, gt=0, lt=1, description="Contour offset as a fraction of the smallest training decision value")

    @classmethod
    def from_config(cls, cfg: Optional[Config] = None, **overrides) -> "TrainConfig":
        cfg = cfg or default_config
        values = {**cfg.get_lssvm_config(), 'contour_level': cfg.get('svc', 'contour_level')}
        return cls(**{**values, **overrides})


class QTrainConfig(BaseModel):
    zeta: float = Field(1.0, gt=0, description="Soft margin constant ζ, the same parameter as γ")
    eig_floor: float = Field(1e-9, gt=0, description="Smallest eigenvalue ε_K kept by the spectral inversion")
    kernel_accuracy: float = Field(1e-3, gt=0, description="Estimator accuracy ε")
    shots: Optional[int] = Field(None, ge=1, description="Measurement shots; None selects exact mode")
    grover_fail_prob: float = Field(0.1, gt=0, lt=1, description="Per-step Grover failure budget ε_g")
    seed: int = Field(0, description="Seed for every sampling step")
    sv_threshold: float = Field(1e-8, ge=0)
    contour_level: float = Field(0.5, gt=0, lt=1)
    state_vector_qubits: int = Field(20, ge=1, le=30, description="Largest Grover register simulated as a state vector")
    counting_only: bool = Field(False, description="Force analytic Grover query counting")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @classmethod
    def from_config(cls, cfg: Optional[Config] = None, **overrides) -> "QTrainConfig":
        cfg = cfg or default_config
        quantum = cfg.get_quantum_config()
        values = {
            'zeta': cfg.get('lssvm', 'gamma'),
            'eig_floor': quantum['eig_floor'],
            'kernel_accuracy': quantum['kernel_accuracy'],
            'grover_fail_prob': quantum['grover_fail_prob'],
            'state_vector_qubits': quantum['state_vector_qubits'],
            'sv_threshold': cfg.get('lssvm', 'sv_threshold'),
            'contour_level': cfg.get('svc', 'contour_level'),
        }
        return cls(**{**values, **overrides})


class QueryStats(BaseModel):
    grover_iterations: int = Field(0, ge=0)
    oracle_queries: int = Field(0, ge=0)
    grover_invocations: int = Field(0, ge=0)
    classical_fallback_scans: int = Field(0, ge=0)
    counting_only: bool = False

    @model_validator(mode="after")
    def check_counts(self):
        if self.oracle_queries < self.grover_iterations:
            raise ValueError("oracle_queries must be at least grover_iterations")
        return self

    def record(self, iterations: int, queries: int) -> None:
        self.grover_invocations += 1
        self.grover_iterations += int(iterations)
        self.oracle_queries += int(queries)


class ScanStats(BaseModel):
    neighbour_scans: int = Field(0, ge=0)


class GroverOutcome(BaseModel):
    found_index: Optional[int] = None
    iterations: int = Field(..., ge=0)
    oracle_queries: int = Field(..., ge=0)
    success_probability: float = Field(..., ge=0, le=1)

    @model_validator(mode="after")
    def check_queries(self):
        if self.oracle_queries < self.iterations:
            raise ValueError("every Grover iteration costs one oracle query")
        return self


class ClusterResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    cluster_count: int = Field(..., ge=1, alias="clusterCount")
    clusters: List[List[str]] = Field(..., description="Point ids per cluster")
    membership: Dict[str, int] = Field(..., description="Point id -> cluster index")
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_partition(self):
        if self.cluster_count != len(self.clusters):
            raise ValueError(f"clusterCount {self.cluster_count} != {len(self.clusters)} clusters")
        seen = set()
        for index, members in enumerate(self.clusters):
            if not members:
                raise ValueError(f"cluster {index} is empty")
            for point_id in members:
                if point_id in seen:
                    raise ValueError(f"point {point_id} appears in more than one cluster")
                if self.membership.get(point_id) != index:
                    raise ValueError(f"membership of {point_id} does not match cluster {index}")
                seen.add(point_id)
        if seen != set(self.membership):
            raise ValueError("membership and clusters cover different ids")
        return self

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)


class BlobSpec(BaseModel):
    center: List[float] = Field(..., min_length=1)
    spread: float = Field(..., gt=0)
    count: int = Field(..., ge=1)


class SyntheticRecipe(BaseModel):
    seed: int = 0
    blobs: List[BlobSpec] = Field(..., min_length=1)


class ExperimentConfig(BaseModel):
    input_path: Optional[str] = None
    has_labels: bool = False
    synthetic: Optional[SyntheticRecipe] = None
    kernel: KernelSpec
    gamma: float = Field(1.0, gt=0)
    backend: BackendName = "classical"
    line_samples: int = Field(10, ge=2)
    shots: Optional[int] = Field(None, ge=1)
    seed: int = 0
    out_dir: str = "out"
    contour_level: float = Field(0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def check_consistency(self):
        if (self.input_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of input_path or synthetic must be given")
        if self.backend == "quantum-shots" and self.shots is None:
            raise ValueError("quantum-shots backend needs shots")
        if self.backend != "quantum-shots" and self.shots is not None:
            raise ValueError(f"shots only apply to the quantum-shots backend, not {self.backend}")
        return self


class BenchRecord(BaseModel):
    m: int = Field(..., ge=0)
    n: int = Field(..., ge=0)
    backend: str
    kernel_evaluations: int = Field(0, ge=0)
    segment_tests: int = Field(0, ge=0)
    neighbour_scans: Optional[int] = None
    query_stats: Optional[QueryStats] = None
    cluster_count: Optional[int] = None
    wall_time_s: float = Field(0.0, ge=0)
    config: Dict[str, Any]
    extra: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('config')
    @classmethod
    def validate_config(cls, v):
        if not v:
            raise ValueError("every record carries its full config")
        return v


class BenchReport(BaseModel):
    schema_version: Literal["1"] = "1"
    command: str
    records: List[BenchRecord] = Field(default_factory=list)
    metadata: Dict[str, Any] = Field(default_factory=dict)
