"""Run configuration in flat ``key = value`` text form.

Lines are ``key = value`` with ``#`` comments; dotted keys group settings
(``model.s``, ``sweep.axis1.n``, ``sim.seed``...).  Unknown keys are an
error.  ``RunConfig.dumps`` writes every key with its effective value, so
``loads(dumps(cfg)) == cfg``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

from .analysis import METRICS, Axis
from .mc import SimConfig
from .model import (
    IncentiveScheme,
    ModelParams,
    ModelVariant,
    WelfareConfig,
)

FORMATS = ("csv", "svg", "dot")


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    variant: ModelVariant = field(default_factory=ModelVariant)
    scheme: IncentiveScheme = IncentiveScheme.VIGILANT
    welfare: WelfareConfig = field(default_factory=WelfareConfig)
    axis1: Axis = field(default_factory=lambda: Axis("s", 1.0, 5.0, 41))
    axis2: Axis = field(default_factory=lambda: Axis("p_r", 0.0, 1.0, 41))
    metrics: tuple = METRICS
    regulator: str = "market"
    n_jobs: int = 1
    output_dir: str = "out"
    formats: tuple = FORMATS
    sim: SimConfig = field(default_factory=SimConfig)
    sim_replicas: int = 8
    sim_beta: float | None = None
    tolerance: float = 0.05

    def to_items(self) -> list:
        """Every setting as an ordered list of ``(key, text)`` pairs."""
        items = [(f"model.{k}", _fmt(v)) for k, v in asdict(self.params).items()]
        items += [(f"variant.{f.name}", _fmt(getattr(self.variant, f.name))) for f in fields(self.variant)]
        items.append(("scheme", _fmt(self.scheme)))
        items += [(f"welfare.{k}", _fmt(v)) for k, v in asdict(self.welfare).items()]
        for tag, ax in (("axis1", self.axis1), ("axis2", self.axis2)):
            items += [
                (f"sweep.{tag}", ax.name),
                (f"sweep.{tag}.min", _fmt(float(ax.lo))),
                (f"sweep.{tag}.max", _fmt(float(ax.hi))),
                (f"sweep.{tag}.n", str(ax.n)),
            ]
        items += [
            ("sweep.metrics", _fmt(self.metrics)),
            ("sweep.regulator", self.regulator),
            ("sweep.n_jobs", str(self.n_jobs)),
            ("output.dir", self.output_dir),
            ("output.formats", _fmt(self.formats)),
        ]
        items += [(f"sim.{k}", _fmt(v)) for k, v in asdict(self.sim).items()]
        items += [
            ("sim.replicas", str(self.sim_replicas)),
            ("sim.beta", _fmt(self.sim_beta)),
            ("validate.tolerance", _fmt(self.tolerance)),
        ]
        return items

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_items())

    @classmethod
    def keys(cls) -> list:
        return [k for k, _ in cls().to_items()]

    @classmethod
    def loads(cls, text: str, overrides=()) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, value = (part.strip() for part in item.split("=", 1))
            values[key] = value
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = set(cls.keys())
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls()
        try:
            return cfg._apply(values)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def _apply(self, values: dict) -> "RunConfig":
        def group(prefix):
            return {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}

        p = {}
        for f in fields(ModelParams):
            if f.name in group("model."):
                text = group("model.")[f.name]
                p[f.name] = int(text) if f.type == "int" else float(text)
        params = replace(self.params, **p)

        v = group("variant.")
        variant = ModelVariant(
            risk_model=v.get("risk_model", self.variant.risk_model),
            au_vs_as_speedup=_parse_bool(v["au_vs_as_speedup"]) if "au_vs_as_speedup" in v
            else self.variant.au_vs_as_speedup,
            catchup_denominator=v.get("catchup_denominator", self.variant.catchup_denominator),
            both_caught_full_punishment=_parse_bool(v["both_caught_full_punishment"])
            if "both_caught_full_punishment" in v else self.variant.both_caught_full_punishment,
        )

        wv = group("welfare.")
        welfare = WelfareConfig(
            externality_scale=float(wv.get("externality_scale", self.welfare.externality_scale)),
            include_regulator_surplus=_parse_bool(wv["include_regulator_surplus"])
            if "include_regulator_surplus" in wv else self.welfare.include_regulator_surplus,
            include_government_cost=_parse_bool(wv["include_government_cost"])
            if "include_government_cost" in wv else self.welfare.include_government_cost,
        )

        def axis(tag, default):
            return Axis(
                values.get(f"sweep.{tag}", default.name),
                float(values.get(f"sweep.{tag}.min", default.lo)),
                float(values.get(f"sweep.{tag}.max", default.hi)),
                int(values.get(f"sweep.{tag}.n", default.n)),
            )

        metrics = tuple(m.strip() for m in values.get("sweep.metrics", ",".join(self.metrics)).split(",") if m.strip())
        bad = [m for m in metrics if m not in METRICS]
        if bad:
            raise ValueError(f"unknown metrics {bad}; choose from {METRICS}")
        formats = tuple(f.strip() for f in values.get("output.formats", ",".join(self.formats)).split(",") if f.strip())
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ValueError(f"unknown output formats {bad}; choose from {FORMATS}")
        regulator = values.get("sweep.regulator", self.regulator)
        if regulator not in ("market", "government"):
            raise ValueError(f"sweep.regulator must be 'market' or 'government', got {regulator!r}")

        s = group("sim.")
        sim = SimConfig(
            mutation_rate=float(s.get("mutation_rate", self.sim.mutation_rate)),
            steps=int(float(s.get("steps", self.sim.steps))),
            burn_in=int(float(s.get("burn_in", self.sim.burn_in))),
            seed=int(s.get("seed", self.sim.seed)),
            report_every=int(float(s.get("report_every", self.sim.report_every))),
        )
        sim_beta_text = s.get("beta", _fmt(self.sim_beta))
        sim_beta = None if sim_beta_text.lower() == "none" else float(sim_beta_text)
        replicas = int(s.get("replicas", self.sim_replicas))
        if replicas < 1:
            raise ValueError("sim.replicas must be positive")
        n_jobs = int(values.get("sweep.n_jobs", self.n_jobs))

        return RunConfig(
            params=params,
            variant=variant,
            scheme=IncentiveScheme.parse(values.get("scheme", self.scheme)),
            welfare=welfare,
            axis1=axis("axis1", self.axis1),
            axis2=axis("axis2", self.axis2),
            metrics=metrics,
            regulator=regulator,
            n_jobs=n_jobs,
            output_dir=values.get("output.dir", self.output_dir),
            formats=formats,
            sim=sim,
            sim_replicas=replicas,
            sim_beta=sim_beta,
            tolerance=float(values.get("validate.tolerance", self.tolerance)),
        )
