//! JSON Schemas (draft 2020-12) for run configurations and reports.

use serde_json::{json, Value};

use crate::config::Experiment;

fn number() -> Value {
    json!({"type": "number"})
}

fn nullable(kind: &str) -> Value {
    json!({"type": [kind, "null"]})
}

fn shape_report() -> Value {
    json!({
        "type": ["object", "null"],
        "required": ["applicable", "gaussian_r2", "exponential_r2", "best", "fitted_rate", "window_low", "window_high", "points"],
        "additionalProperties": false,
        "properties": {
            "applicable": {"type": "boolean"},
            "gaussian_r2": nullable("number"),
            "exponential_r2": nullable("number"),
            "best": {"enum": ["gaussian", "exponential", null]},
            "fitted_rate": nullable("number"),
            "window_low": number(),
            "window_high": number(),
            "points": {"type": "integer", "minimum": 0}
        }
    })
}

fn polarization() -> Value {
    json!({
        "type": "object",
        "required": ["px", "py", "pz"],
        "additionalProperties": false,
        "properties": {"px": number(), "py": number(), "pz": number()}
    })
}

fn distribution() -> Value {
    json!({
        "type": "object",
        "required": ["kind"],
        "additionalProperties": false,
        "properties": {
            "kind": {"enum": ["fixed", "uniform", "gaussian", "lorentzian"]},
            "center": number(),
            "width": {"type": "number", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0}
        }
    })
}

pub fn config_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "spinbath run configuration",
        "type": "object",
        "required": ["version", "experiment", "model", "numerics", "output"],
        "additionalProperties": false,
        "properties": {
            "version": {"const": crate::config::CONFIG_VERSION},
            "experiment": {"enum": Experiment::ALL},
            "model": {
                "type": "object",
                "required": ["n", "couplings"],
                "additionalProperties": false,
                "properties": {
                    "n": {"type": "integer", "minimum": 1},
                    "couplings": distribution(),
                    "weights": {
                        "oneOf": [
                            {
                                "type": "object", "required": ["uniform"], "additionalProperties": false,
                                "properties": {"uniform": {"type": "number", "minimum": 0, "maximum": 1}}
                            },
                            {
                                "type": "object", "required": ["per_spin"], "additionalProperties": false,
                                "properties": {"per_spin": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}}}
                            }
                        ]
                    },
                    "delta": number(),
                    "p0": {"type": "array", "items": number(), "minItems": 3, "maxItems": 3},
                    "eta": {"enum": ["exact", "gaussian"]},
                    "s": {"type": "number", "exclusiveMinimum": 0}
                }
            },
            "numerics": {
                "type": "object",
                "required": ["time"],
                "additionalProperties": false,
                "properties": {
                    "time": {
                        "type": "object",
                        "required": ["start", "stop", "count"],
                        "additionalProperties": false,
                        "properties": {
                            "start": number(),
                            "stop": number(),
                            "count": {"type": "integer", "minimum": 2},
                            "units": {"enum": ["absolute", "inverse_s"]}
                        }
                    },
                    "quadrature_nodes": {"type": "integer", "minimum": spinbath_core::quadrature::MIN_NODES, "maximum": spinbath_core::quadrature::MAX_NODES / 2},
                    "quadrature": {"enum": ["gauss_hermite", "panels"]},
                    "enumeration_cap": {"type": "integer", "minimum": 1, "maximum": 30},
                    "ensemble_size": {"type": "integer", "minimum": 1},
                    "histogram_bins": {"type": "integer", "minimum": 1},
                    "threads": {"type": "integer", "minimum": 1},
                    "merge_degenerate": {"type": "boolean"},
                    "basis_thresholds": {
                        "type": "object",
                        "required": ["z_below", "x_above"],
                        "additionalProperties": false,
                        "properties": {
                            "z_below": {"type": "number", "minimum": 0, "maximum": 1},
                            "x_above": {"type": "number", "minimum": 0, "maximum": 1}
                        }
                    }
                }
            },
            "output": {
                "type": "object",
                "required": ["directory"],
                "additionalProperties": false,
                "properties": {
                    "directory": {"type": "string", "minLength": 1},
                    "formats": {"type": "array", "items": {"enum": ["csv", "dat"]}, "minItems": 1}
                }
            }
        }
    })
}

pub fn report_schema() -> Value {
    let mut config = config_schema();
    if let Some(obj) = config.as_object_mut() {
        obj.remove("$schema");
        obj.remove("title");
    }
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "spinbath run report",
        "type": "object",
        "required": [
            "format", "library_version", "rng_algorithm", "units", "energy_unit", "threads", "config", "time_span", "s",
            "eta_stats", "lindeberg_ratio", "shape", "shape_of_mean", "gaussian_law_deviation",
            "echo_max_deviation", "pointer", "pz_drift", "comparisons", "flags", "warnings", "files",
            "timings", "total_seconds", "exit_code"
        ],
        "additionalProperties": false,
        "properties": {
            "format": {"const": crate::report::REPORT_FORMAT},
            "library_version": {"type": "string"},
            "rng_algorithm": {"type": "string"},
            "units": {"type": "string"},
            "energy_unit": {
                "type": "object",
                "required": ["reference", "value"],
                "additionalProperties": false,
                "properties": {
                    "reference": {"enum": ["couplings.center", "s", "couplings.width"]},
                    "value": {"type": "number", "minimum": 0}
                }
            },
            "threads": {"type": "integer", "minimum": 1},
            "config": config,
            "time_span": {
                "type": "object",
                "required": ["start", "stop", "count"],
                "additionalProperties": false,
                "properties": {"start": number(), "stop": number(), "count": {"type": "integer", "minimum": 2}}
            },
            "s": nullable("number"),
            "eta_stats": {
                "type": ["object", "null"],
                "required": ["mean", "std", "per_spin_means", "per_spin_vars"],
                "additionalProperties": false,
                "properties": {
                    "mean": number(),
                    "std": {"type": "number", "minimum": 0},
                    "per_spin_means": {"type": "array", "items": number()},
                    "per_spin_vars": {"type": "array", "items": {"type": "number", "minimum": 0}}
                }
            },
            "lindeberg_ratio": nullable("number"),
            "shape": shape_report(),
            "shape_of_mean": shape_report(),
            "gaussian_law_deviation": nullable("number"),
            "echo_max_deviation": nullable("number"),
            "pointer": {
                "type": ["object", "null"],
                "required": ["residual", "gamma_value", "basis", "delta_over_s", "provenance"],
                "additionalProperties": false,
                "properties": {
                    "residual": polarization(),
                    "gamma_value": {"type": "number", "minimum": 0, "maximum": 1},
                    "basis": {"enum": ["z_dominant", "x_dominant", "crossover"]},
                    "delta_over_s": {"type": "number", "minimum": 0},
                    "provenance": {"const": "analytic"}
                }
            },
            "pz_drift": nullable("number"),
            "comparisons": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["regime", "ratio", "max_abs_diff", "valid_samples", "file"],
                    "additionalProperties": false,
                    "properties": {
                        "regime": {"enum": ["small_delta_short", "small_delta_long", "large_delta_alltime"]},
                        "ratio": {"type": "number", "minimum": 0},
                        "max_abs_diff": nullable("number"),
                        "valid_samples": {"type": "integer", "minimum": 0},
                        "file": nullable("string")
                    }
                }
            },
            "flags": {"type": "array", "items": {"type": "string"}},
            "warnings": {"type": "array", "items": {"type": "string"}},
            "files": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["path", "sha256", "bytes"],
                    "additionalProperties": false,
                    "properties": {
                        "path": {"type": "string"},
                        "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                        "bytes": {"type": "integer", "minimum": 0}
                    }
                }
            },
            "timings": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["stage", "seconds"],
                    "additionalProperties": false,
                    "properties": {"stage": {"type": "string"}, "seconds": {"type": "number", "minimum": 0}}
                }
            },
            "total_seconds": {"type": "number", "minimum": 0},
            "exit_code": {"enum": [0, 3]}
        }
    })
}
