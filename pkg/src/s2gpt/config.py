"""Run configuration: JSON schema, strict validation, per-family defaults.

Every field has a default derived from the PDE family; unknown keys are
rejected with their path so typos never silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .errors import ConfigError
from .optim import OptimConfig
from .pdes import PDE_FACTORIES, GridResolution, get_pde


@dataclass
class FomConfig:
    layers: tuple
    optimizer: str = "lbfgs"
    epochs: int = 50
    learning_rate: float = 0.1
    history: int = 20
    grad_tol: float = 0.0
    loss_tol: float = 0.0
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    adam_warmup: int = 0
    adam_learning_rate: float = 1e-3
    loss_weights: tuple = (1.0, 1.0, 1.0)

    def optim_config(self) -> OptimConfig:
        return OptimConfig(learning_rate=self.learning_rate, epochs=self.epochs,
                           history=self.history, grad_tol=self.grad_tol,
                           loss_tol=self.loss_tol, c1=self.wolfe_c1,
                           c2=self.wolfe_c2)

    def fom_kwargs(self) -> dict:
        return dict(layers=self.layers, optim_config=self.optim_config(),
                    optimizer=self.optimizer, adam_warmup=self.adam_warmup,
                    adam_learning_rate=self.adam_learning_rate,
                    loss_weights=tuple(self.loss_weights))


@dataclass
class OnlineConfig:
    optimizer: str = "gd"
    epochs: int = 2000
    learning_rate: float = 0.02
    grad_tol: float = 1e-10

    def optim_config(self) -> OptimConfig:
        return OptimConfig(learning_rate=self.learning_rate, epochs=self.epochs,
                           grad_tol=self.grad_tol)


@dataclass
class TestConfig:
    counts: tuple
    reference: str = "auto"       # auto | exact | fom | none
    online_epochs: Optional[int] = None


@dataclass
class RunConfig:
    pde: str
    pde_options: dict
    grid: GridResolution
    train_counts: tuple
    train_domain: Optional[tuple]  # per-dim (lo, hi) sub-box or None
    n_basis: int
    fom: FomConfig
    online: OnlineConfig
    test: TestConfig
    seed: int = 20240100
    output_dir: str = "runs/out"
    checkpoint: bool = False
    baseline: bool = True

    def make_pde(self):
        return get_pde(self.pde, **self.pde_options)


def default_config(pde_name: str) -> RunConfig:
    if pde_name not in PDE_FACTORIES:
        raise ConfigError(f"unknown pde {pde_name!r}; choices {sorted(PDE_FACTORIES)}")
    pde = get_pde(pde_name)
    d = pde.defaults
    return RunConfig(
        pde=pde_name,
        pde_options={},
        grid=d.grid,
        train_counts=d.train_counts,
        train_domain=None,
        n_basis=d.n_basis,
        fom=FomConfig(layers=d.layers),
        online=OnlineConfig(),
        test=TestConfig(counts=d.test_counts),
        output_dir=f"runs/{pde_name}",
    )


def _take(src: dict, allowed: dict, path: str) -> dict:
    unknown = set(src) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) {sorted(unknown)} under '{path}'")
    return {k: src[k] for k in src}


def config_from_dict(raw: dict) -> RunConfig:
    if "pde" not in raw:
        raise ConfigError("config must name a 'pde'")
    base = default_config(str(raw["pde"]))
    top_allowed = {
        "pde": None, "pde_options": None, "grid": None, "train": None,
        "n_basis": None, "fom": None, "online": None, "test": None,
        "seed": None, "output_dir": None, "checkpoint": None, "baseline": None,
    }
    raw = _take(raw, top_allowed, "<root>")

    pde_options = dict(raw.get("pde_options", {}))
    if base.pde == "helmholtz":
        _take(pde_options, {"k": None}, "pde_options")
    elif pde_options:
        raise ConfigError(f"pde_options not supported for {base.pde}")

    grid = base.grid
    if "grid" in raw:
        g = _take(dict(raw["grid"]),
                  {"nx": None, "nt": None, "ny": None,
                   "n_initial": None, "n_boundary": None}, "grid")
        second = "ny" if base.pde == "helmholtz" else "nt"
        if ("nt" in g and second == "ny") or ("ny" in g and second == "nt"):
            raise ConfigError(f"grid for {base.pde} uses '{second}', not both axes")
        grid = GridResolution(
            na=int(g.get("nx", grid.na)),
            nb=int(g.get(second, grid.nb)),
            n_initial=int(g.get("n_initial", grid.n_initial)),
            n_boundary=int(g.get("n_boundary", grid.n_boundary)),
        )

    train_counts = base.train_counts
    train_domain = None
    if "train" in raw:
        t = _take(dict(raw["train"]), {"counts": None, "domain": None}, "train")
        if "counts" in t:
            train_counts = tuple(int(v) for v in t["counts"])
        if "domain" in t and t["domain"] is not None:
            train_domain = tuple((float(lo), float(hi)) for lo, hi in t["domain"])

    fom = base.fom
    if "fom" in raw:
        f = _take(dict(raw["fom"]), {k: None for k in (
            "layers", "optimizer", "epochs", "learning_rate", "history",
            "grad_tol", "loss_tol", "wolfe_c1", "wolfe_c2", "adam_warmup",
            "adam_learning_rate", "loss_weights")}, "fom")
        merged = asdict(fom)
        merged.update(f)
        merged["layers"] = tuple(int(v) for v in merged["layers"])
        merged["loss_weights"] = tuple(float(v) for v in merged["loss_weights"])
        fom = FomConfig(**merged)

    online = base.online
    if "online" in raw:
        o = _take(dict(raw["online"]), {k: None for k in (
            "optimizer", "epochs", "learning_rate", "grad_tol")}, "online")
        merged = asdict(online)
        merged.update(o)
        online = OnlineConfig(**merged)
    for role, optname in (("fom", fom.optimizer), ("online", online.optimizer)):
        if optname not in ("gd", "adam", "lbfgs"):
            raise ConfigError(f"{role}.optimizer {optname!r} not one of gd/adam/lbfgs")

    test = base.test
    if "test" in raw:
        t = _take(dict(raw["test"]),
                  {"counts": None, "reference": None, "online_epochs": None}, "test")
        test = TestConfig(
            counts=tuple(int(v) for v in t.get("counts", test.counts)),
            reference=str(t.get("reference", test.reference)),
            online_epochs=t.get("online_epochs", test.online_epochs),
        )
        if test.reference not in ("auto", "exact", "fom", "none"):
            raise ConfigError(f"test.reference {test.reference!r} not recognized")

    cfg = RunConfig(
        pde=base.pde,
        pde_options=pde_options,
        grid=grid,
        train_counts=train_counts,
        train_domain=train_domain,
        n_basis=int(raw.get("n_basis", base.n_basis)),
        fom=fom,
        online=online,
        test=test,
        seed=int(raw.get("seed", base.seed)),
        output_dir=str(raw.get("output_dir", base.output_dir)),
        checkpoint=bool(raw.get("checkpoint", base.checkpoint)),
        baseline=bool(raw.get("baseline", base.baseline)),
    )
    if cfg.n_basis < 1:
        raise ConfigError("n_basis must be at least 1")
    _check_domain(cfg)
    return cfg


def _check_domain(cfg: RunConfig):
    if cfg.train_domain is None:
        return
    pde = cfg.make_pde()
    if len(cfg.train_domain) != pde.n_params:
        raise ConfigError(
            f"train.domain needs {pde.n_params} ranges for {pde.name}"
        )
    for (lo, hi), (blo, bhi), nm in zip(cfg.train_domain, pde.param_box,
                                        pde.param_names):
        if not (blo <= lo < hi <= bhi):
            raise ConfigError(
                f"train.domain for {nm} = [{lo}, {hi}] not inside [{blo}, {bhi}]"
            )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {exc.lineno}, col {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise ConfigError(f"config {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return config_from_dict(raw)


def config_to_dict(cfg: RunConfig) -> dict:
    """Round-trippable echo of the effective configuration."""
    second = "ny" if cfg.pde == "helmholtz" else "nt"
    return {
        "pde": cfg.pde,
        "pde_options": dict(cfg.pde_options),
        "grid": {"nx": cfg.grid.na, second: cfg.grid.nb,
                 "n_initial": cfg.grid.n_initial,
                 "n_boundary": cfg.grid.n_boundary},
        "train": {"counts": list(cfg.train_counts),
                  "domain": None if cfg.train_domain is None
                  else [list(r) for r in cfg.train_domain]},
        "n_basis": cfg.n_basis,
        "fom": {**asdict(cfg.fom),
                "layers": list(cfg.fom.layers),
                "loss_weights": list(cfg.fom.loss_weights)},
        "online": asdict(cfg.online),
        "test": {"counts": list(cfg.test.counts),
                 "reference": cfg.test.reference,
                 "online_epochs": cfg.test.online_epochs},
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
        "checkpoint": cfg.checkpoint,
        "baseline": cfg.baseline,
    }
