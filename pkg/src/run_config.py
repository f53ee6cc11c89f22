"""
Run configuration management: presets for every command, config files and logging setup
"""
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import yaml
from dotenv import load_dotenv

from .torus_model import TorusConfig

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class Backend(Enum):
    EXACT = "exact"
    FLOAT = "float"


class ModelKind(Enum):
    HAND = "hand"
    RANDOM = "random"
    TORUS = "torus"
    FILE = "file"


class ThetaPolicy(Enum):
    MAX_GAP = "max_gap"
    LOW_EDGE = "low_edge"
    EXPLICIT = "explicit"


class DeformMode(Enum):
    METRIC = "metric"
    FLUX = "flux"


class Command(Enum):
    VERIFY = "verify"
    TORSION = "torsion"
    TORUS = "torus"
    DEFORM = "deform"
    DUAL = "dual"
    RSNORM = "rsnorm"
    LEAK = "leak"


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


@dataclass
class TorusSpec:
    K: int = 1
    a: List = field(default_factory=lambda: [0.0, 0.0, 0.0])
    h: object = 0.0
    metric: List[float] = field(default_factory=lambda: [1.0, 1.0, 1.0])

    def to_config(self) -> TorusConfig:
        return TorusConfig(
            K=self.K,
            a=tuple(_complex(x) for x in self.a),
            h=_complex(self.h),
            metric=tuple(float(s) for s in self.metric),
        )


@dataclass
class RandomSpec:
    n0: int = 3
    n1: int = 3
    r0: int = 2
    r1: int = 1
    seed: Optional[int] = None
    radius: int = 2
    unitary: bool = False
    with_metric: bool = False

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("Random model specs need a seed")
        if min(self.n0, self.n1, self.r0, self.r1) < 0 or self.r0 + self.r1 > min(self.n0, self.n1):
            raise ValueError(f"Ranks ({self.r0}, {self.r1}) are impossible for dims ({self.n0}, {self.n1})")
        if self.unitary and self.n0 != self.n1:
            raise ValueError("Unitary chiralities need n0 = n1")


@dataclass
class Tolerances:
    identity: float = 1e-9
    split_spread: float = 1e-8
    eta_identity: float = 1e-9
    slope: float = 0.1
    metric_invariance: float = 1e-8
    supertrace: float = 1e-12
    flux_constant: float = 1e-7
    flux_drift: float = 1e-3
    duality: float = 1e-10
    torus_chain: float = 1e-8
    rs_self: float = 1e-10
    rs_hermitian: float = 1e-8
    rs_general: float = 1e-7
    rs_duality: float = 1e-9
    theta: float = 1e-10


@dataclass
class RunConfig:
    name: str
    command: Command
    model: ModelKind
    torus: Optional[TorusSpec] = None
    random: Optional[RandomSpec] = None
    path: Optional[str] = None
    cuts: List[float] = field(default_factory=lambda: [0.0])
    theta: ThetaPolicy = ThetaPolicy.MAX_GAP
    theta_value: Optional[float] = None
    backend: Backend = Backend.FLOAT
    deform_mode: DeformMode = DeformMode.METRIC
    tolerances: Tolerances = field(default_factory=Tolerances)
    count: int = 20
    jobs: int = 1
    output: Optional[str] = None
    description: str = ""

    def __post_init__(self):
        sources = {
            ModelKind.TORUS: self.torus is not None,
            ModelKind.RANDOM: self.random is not None,
            ModelKind.FILE: self.path is not None,
        }
        given = [kind for kind, present in sources.items() if present]
        if len(given) > 1:
            raise ValueError(f"Exactly one model source allowed, got {[k.value for k in given]}")
        if self.model in sources and not sources[self.model]:
            raise ValueError(f"Model kind '{self.model.value}' needs its spec")
        if self.model == ModelKind.HAND and given:
            raise ValueError("The hand fixture takes no model spec")
        if self.theta == ThetaPolicy.EXPLICIT and self.theta_value is None:
            raise ValueError("An explicit theta policy needs theta_value")
        if any(c < 0 for c in self.cuts):
            raise ValueError(f"Cuts must be non-negative, got {self.cuts}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")

    def to_dict(self) -> Dict:
        data = asdict(self)
        for key in ("command", "model", "theta", "backend", "deform_mode"):
            data[key] = getattr(self, key).value
        return data


def run_config_from_dict(data: Dict) -> RunConfig:
    """Build a RunConfig from plain JSON/YAML data"""
    data = dict(data)
    try:
        return RunConfig(
            name=data.get("name", "custom"),
            command=Command(data["command"]),
            model=ModelKind(data["model"]),
            torus=TorusSpec(**data["torus"]) if data.get("torus") else None,
            random=RandomSpec(**data["random"]) if data.get("random") else None,
            path=data.get("path"),
            cuts=[float(c) for c in data.get("cuts", [0.0])],
            theta=ThetaPolicy(data.get("theta", ThetaPolicy.MAX_GAP.value)),
            theta_value=data.get("theta_value"),
            backend=Backend(data.get("backend", Backend.FLOAT.value)),
            deform_mode=DeformMode(data.get("deform_mode", DeformMode.METRIC.value)),
            tolerances=Tolerances(**data.get("tolerances", {})),
            count=int(data.get("count", 20)),
            jobs=int(data.get("jobs", 1)),
            output=data.get("output"),
            description=data.get("description", ""),
        )
    except KeyError as e:
        raise ValueError(f"Missing required config field: {e.args[0]}")
    except TypeError as e:
        raise ValueError(f"Invalid config field: {e}")


class RunConfigManager:
    """Named presets for every command plus file-based configurations"""

    def __init__(self):
        self.configurations = self._load_default_configurations()

    def _load_default_configurations(self) -> Dict[str, RunConfig]:
        """Load default run configurations"""
        configs = [
            RunConfig("verify", Command.VERIFY, ModelKind.RANDOM, random=RandomSpec(seed=1),
                      count=1000, description="Exact sign suites and randomized float suites"),
            RunConfig("verify-quick", Command.VERIFY, ModelKind.RANDOM, random=RandomSpec(seed=1),
                      count=20, description="Reduced suite counts"),
            RunConfig("torsion-hand", Command.TORSION, ModelKind.HAND, cuts=[1.0],
                      description="diag(2,0)/diag(0,3) fixture with identity chirality"),
            RunConfig("torsion-random", Command.TORSION, ModelKind.RANDOM, random=RandomSpec(seed=7),
                      cuts=[0.0], description="Acyclic random 3+3 complex"),
            RunConfig("torus-generic", Command.TORUS, ModelKind.TORUS,
                      torus=TorusSpec(K=1, a=[0.31, 0.17, 0.23], h=0.5),
                      description="Acyclic truncated torus with generic holonomy"),
            RunConfig("torus-cohomology", Command.TORUS, ModelKind.TORUS,
                      torus=TorusSpec(K=1, a=[0.0, 0.0, 0.0], h=1.0),
                      description="Zero holonomy with flux: twisted cohomology (3,3)"),
            RunConfig("deform-metric", Command.DEFORM, ModelKind.TORUS,
                      torus=TorusSpec(K=1, a=[0.31, 0.17, 0.23], h=0.5), deform_mode=DeformMode.METRIC,
                      description="Metric grid t in [1,2] on the truncated torus"),
            RunConfig("deform-flux", Command.DEFORM, ModelKind.RANDOM, random=RandomSpec(n0=4, n1=4, r0=2, r1=2, seed=3),
                      cuts=[0.5], deform_mode=DeformMode.FLUX,
                      description="Flux deformations, supertraceless and Tr_s = 5"),
            RunConfig("dual-random", Command.DUAL, ModelKind.RANDOM,
                      random=RandomSpec(seed=11, unitary=True), description="Duality residuals on a random 3+3 complex"),
            RunConfig("dual-torus", Command.DUAL, ModelKind.TORUS,
                      torus=TorusSpec(K=1, a=[[0.3, 0.1], [0.2, 0.0], [0.1, -0.05]], h=0.5),
                      description="Duality chain on the torus with complex holonomy"),
            RunConfig("rsnorm-torus", Command.RSNORM, ModelKind.TORUS,
                      torus=TorusSpec(K=1, a=[0.31, 0.17, 0.23], h=0.5),
                      description="Ray-Singer norm of rho_an for a Hermitian torus"),
            RunConfig("rsnorm-random", Command.RSNORM, ModelKind.RANDOM,
                      random=RandomSpec(seed=5, with_metric=True), count=50,
                      description="Norm against exp(pi Im eta) on random complexes"),
            RunConfig("leak", Command.LEAK, ModelKind.TORUS,
                      torus=TorusSpec(K=2, a=[0.31, 0.17, 0.23], h=0.5),
                      description="Boundary leak of a gauged flux as a function of K"),
        ]
        return {config.name: config for config in configs}

    def get_configuration(self, name: str) -> Optional[RunConfig]:
        """Get a preset by name"""
        return self.configurations.get(name)

    def list_configurations(self) -> List[Dict]:
        """List all available presets"""
        return [
            {
                "name": name,
                "command": config.command.value,
                "model": config.model.value,
                "cuts": config.cuts,
                "backend": config.backend.value,
                "description": config.description,
            }
            for name, config in self.configurations.items()
        ]

    def create_custom_configuration(self, name: str, custom_config: Dict) -> RunConfig:
        """Create a configuration from a preset and overrides"""
        base_config = self.get_configuration(name)
        if not base_config:
            raise ValueError(f"No base configuration found for {name}")
        config_dict = base_config.to_dict()
        config_dict.update(custom_config)
        return run_config_from_dict(config_dict)

    def load_file(self, path: str) -> RunConfig:
        """Load a JSON or YAML config file"""
        file_path = Path(path)
        if not file_path.exists():
            raise ValueError(f"Config file not found: {path}")
        try:
            with open(file_path, "r") as f:
                if file_path.suffix in (".yml", ".yaml"):
                    data = yaml.safe_load(f)
                else:
                    data = json.load(f)
        except (json.JSONDecodeError, yaml.YAMLError, IOError) as e:
            raise ValueError(f"Failed to load config {path}: {str(e)}")
        if not isinstance(data, dict):
            raise ValueError(f"Config {path} must hold a mapping")
        if "preset" in data:
            preset = data.pop("preset")
            return self.create_custom_configuration(preset, data)
        return run_config_from_dict(data)


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stream handler at the level named by TORSIONLAB_LOG"""
    load_dotenv()
    name = (level or os.getenv("TORSIONLAB_LOG", "WARNING")).upper()
    logging.basicConfig(level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT, force=True)
