"""
Builtin scenarios and name/path resolution.

Every builtin is a plain dict in the same schema a scenario JSON file uses, so
``main.py list --machine`` output can be saved, edited and run back.
"""
import json
import logging
import os
from copy import deepcopy

from rlsForget.errors import ConfigError
from rlsForget.scenarios.config import Scenario, scenario_from_dict


logger = logging.getLogger(__name__)

FIRST_ORDER = {"kind": "arx", "num": [0.8], "den": [1.0, -0.4], "nb": 1, "na": 1, "outputs_first": True}
FIFTH_ORDER = {"kind": "arx", "num": [0.68, -0.16, -0.12, -0.18, 0.09],
               "den": [1.0, -1.0, 0.41, -0.17, -0.03, 0.01], "nb": 5, "na": 5}
FIR3 = {"kind": "arx", "num": [1.0, 0.8, 0.5], "den": [1.0, 0.0, 0.0, 0.0], "nb": 3, "na": 0}
INPUT_PAIR = {"kind": "input_window", "width": 2}

THREE_SINE = {"kind": "ThreeSine"}
WHITE = {"kind": "GaussianWhite", "std": 1.0}


def _scenario(name, description, demonstrates, generator, regressor, estimator, steps, **extra) -> dict:
    data = {"name": name, "description": description, "demonstrates": demonstrates, "generator": generator,
            "regressor": regressor, "estimator": estimator, "steps": steps, "seed": 0}
    data.update(extra)
    return data


BUILTINS: dict[str, dict] = {s["name"]: s for s in (
    _scenario("harmonic-decay", "phi_k = 1/sqrt(k+1), no forgetting",
              "P_k converges to zero without persistent excitation",
              {"kind": "HarmonicDecay"}, {"kind": "scripted"}, {"strategy": "none"}, 10000,
              pe_windows=[1, 10]),
    _scenario("scalar-constant", "constant scalar regressor 1, lambda 0.9",
              "persistent excitation in scalar estimation; P_k tends to (1 - lam)/phi^2",
              {"kind": "Constant", "value": 1.0}, {"kind": "scripted"},
              {"strategy": "uniform", "lambda": 0.9}, 10000, pe_windows=[1], outputs={"V": True}),
    _scenario("scalar-zero-after", "scalar regressor 1 switched to 0 at k0 = 50, lambda 0.9",
              "lack of persistent excitation in scalar estimation; P_k grows by 1/lam per step",
              {"kind": "ZeroAfter", "value": 1.0, "k0": 50}, {"kind": "scripted"},
              {"strategy": "uniform", "lambda": 0.9}, 200),
    _scenario("pe-bounds", "phi_k = [u_k u_{k-1}] with the three-sine input, lambda 0.99",
              "persistent excitation and the bounds on P_k^-1 under uniform forgetting",
              THREE_SINE, INPUT_PAIR, {"strategy": "uniform", "lambda": 0.99, "form": "information"}, 3000,
              theta_true=[1.0, -0.5], pe_windows=[2, 10], outputs={"V": True}),
    _scenario("pe-lost-bounds", "three-sine input switched to 1 at k = 2500, lambda 0.9",
              "lack of persistent excitation: a singular value of P_k^-1 decays until the divergence guard trips",
              {"kind": "SwitchedThreeSineToConstant", "switch_step": 2500, "value": 1.0}, INPUT_PAIR,
              {"strategy": "uniform", "lambda": 0.9, "form": "information"}, 5000,
              theta_true=[1.0, -0.5], pe_windows=[2]),
    _scenario("pe-lost-bounds-nf", "three-sine input switched to 1 at k = 2500, no forgetting",
              "lack of persistent excitation: a singular value of P_k^-1 diverges without forgetting",
              {"kind": "SwitchedThreeSineToConstant", "switch_step": 2500, "value": 1.0}, INPUT_PAIR,
              {"strategy": "none", "form": "information"}, 5000, theta_true=[1.0, -0.5], pe_windows=[2]),
    _scenario("first-order-const", "0.8/(q - 0.4) with u_k = 1, lambda 0.999",
              "z_k converges to zero and theta_k converges, not to the true value (constant-input reading)",
              {"kind": "Constant", "value": 1.0}, FIRST_ORDER, {"strategy": "uniform", "lambda": 0.999}, 5000,
              pe_windows=[10]),
    _scenario("first-order-noise", "0.8/(q - 0.4) with white-noise input, lambda 0.999",
              "z_k converges to zero; white noise excites both directions, so theta_k reaches the true "
              "[0.4 0.8] rather than a biased limit",
              WHITE, FIRST_ORDER, {"strategy": "uniform", "lambda": 0.999}, 10000, pe_windows=[10]),
    _scenario("fir3-rate", "FIR (q^2 + 0.8q + 0.5)/q^3, white noise, no forgetting",
              "O(1/k) convergence of the parameter error without forgetting",
              WHITE, FIR3, {"strategy": "none"}, 10000, outputs={"V": True}),
    _scenario("fir3-rate-0999", "FIR (q^2 + 0.8q + 0.5)/q^3, white noise, lambda 0.999",
              "geometric convergence of the parameter error at rate lam",
              WHITE, FIR3, {"strategy": "uniform", "lambda": 0.999}, 10000, outputs={"V": True}),
    _scenario("fir3-rate-099", "FIR (q^2 + 0.8q + 0.5)/q^3, white noise, lambda 0.99",
              "faster geometric convergence and worse conditioning for smaller lam",
              WHITE, FIR3, {"strategy": "uniform", "lambda": 0.99}, 10000, outputs={"V": True}),
    _scenario("subspace-sine", "phi_k = sin(2 pi k/100) [1 1], theta = [0.4 1.4], no forgetting",
              "estimates confined to the regressor subspace; one singular value of P_k decays",
              {"kind": "SubspaceSine", "period": 100}, {"kind": "scripted"}, {"strategy": "none"}, 1000,
              pe_windows=[10]),
    _scenario("subspace-sine-099", "phi_k = sin(2 pi k/100) [1 1], lambda 0.99",
              "subspace-constrained regressor under uniform forgetting; one singular value of P_k diverges",
              {"kind": "SubspaceSine", "period": 100}, {"kind": "scripted"},
              {"strategy": "uniform", "lambda": 0.99}, 1000),
    _scenario("subspace-sine-vdf", "phi_k = sin(2 pi k/100) [1 1], variable-direction forgetting, lambda 0.99",
              "directions that receive no information keep their singular values",
              {"kind": "SubspaceSine", "period": 100}, {"kind": "scripted"},
              {"strategy": "vdf", "lambda": 0.99, "epsilon": 1e-8}, 1000, outputs={"psi": True}),
    _scenario("arx5-uniform", "5th-order ARX fit, three-sine input, lambda 0.999",
              "lack of persistent excitation and finite-precision arithmetic under uniform forgetting",
              THREE_SINE, FIFTH_ORDER, {"strategy": "uniform", "lambda": 0.999}, 20000, pe_windows=[20]),
    _scenario("arx5-condition", "5th-order ARX fit, three-sine input, lambda 0.99",
              "the condition number of P_k reveals the missing excitation",
              THREE_SINE, FIFTH_ORDER, {"strategy": "uniform", "lambda": 0.99}, 10000, pe_windows=[20]),
    _scenario("arx5-condition-nf", "5th-order ARX fit, three-sine input, no forgetting",
              "singular values of the window Gram matrix at machine zero",
              THREE_SINE, FIFTH_ORDER, {"strategy": "none"}, 10000, pe_windows=[20]),
    _scenario("arx5-info-content", "5th-order ARX fit, three-sine input, lambda 0.99, information content",
              "the information-rich subspace is six dimensional",
              THREE_SINE, FIFTH_ORDER, {"strategy": "uniform", "lambda": 0.99}, 2000, outputs={"psi": True}),
    _scenario("arx5-vdf", "5th-order ARX fit, variable-direction forgetting, lambda 0.9",
              "all singular values of P_k stay bounded under variable-direction forgetting",
              THREE_SINE, FIFTH_ORDER, {"strategy": "vdf", "lambda": 0.9, "epsilon": 1e-8}, 5000,
              outputs={"psi": True}),
    _scenario("arx5-vdf-08", "5th-order ARX fit, variable-direction forgetting, lambda 0.8",
              "unexcited singular values of P_k^-1 do not converge to zero",
              THREE_SINE, FIFTH_ORDER, {"strategy": "vdf", "lambda": 0.8, "epsilon": 1e-8}, 5000,
              outputs={"psi": True}),
    _scenario("arx5-vdf-slow", "5th-order ARX fit, variable-direction forgetting, lambda 0.999",
              "variable-direction counterpart of arx5-uniform",
              THREE_SINE, FIFTH_ORDER, {"strategy": "vdf", "lambda": 0.999, "epsilon": 1e-8}, 20000,
              outputs={"psi": True}),
    _scenario("kreisselmeier-floor", "Kreisselmeier variant I, lambda 0.95, alpha 0.5",
              "matrix forgetting keeps P_k^-1 above alpha I",
              {"kind": "SwitchedThreeSineToConstant", "switch_step": 1000, "value": 1.0}, INPUT_PAIR,
              {"strategy": "kreisselmeier_1", "lambda": 0.95, "alpha": 0.5, "beta": 1.0, "n_odd": 3}, 2000,
              theta_true=[1.0, -0.5]),
    _scenario("kreisselmeier-floor-2", "Kreisselmeier variant II, lambda 0.95, alpha 0.5, beta 1",
              "matrix forgetting with the shifted forgetting matrix",
              {"kind": "SwitchedThreeSineToConstant", "switch_step": 1000, "value": 1.0}, INPUT_PAIR,
              {"strategy": "kreisselmeier_2", "lambda": 0.95, "alpha": 0.5, "beta": 1.0, "n_odd": 3}, 2000,
              theta_true=[1.0, -0.5]),
    _scenario("cao-subspace", "subspace-constrained regressor, Cao forgetting, lambda 0.99",
              "forgetting restricted to the excited direction keeps P_k bounded",
              {"kind": "SubspaceSine", "period": 100}, {"kind": "scripted"}, {"strategy": "cao", "lambda": 0.99},
              2000),
    _scenario("vdf-cost-subspace", "subspace-constrained regressor, cost-consistent variable-direction forgetting",
              "the estimate minimizes a quadratic cost with a growing regularization matrix",
              {"kind": "SubspaceSine", "period": 100}, {"kind": "scripted"},
              {"strategy": "vdf_cost", "lambda": 0.95, "epsilon": 1e-8}, 500, outputs={"psi": True}),
)}


def builtin_names() -> list[str]:
    return list(BUILTINS)


def builtin(name: str) -> Scenario:
    if name not in BUILTINS:
        logger.error(f"[CONFIG] Unknown builtin scenario: {name}")
        raise ConfigError([f"scenario: unknown builtin {name!r}"])
    return scenario_from_dict(deepcopy(BUILTINS[name]), source=f"builtin {name}")


def load_scenario(name_or_path: str) -> Scenario:
    """
    Resolve a builtin name or a path to a scenario JSON file.

    Raises:
        ConfigError: unknown name, unreadable JSON or invalid fields
        OSError: the file exists but cannot be read
    """
    if name_or_path in BUILTINS:
        return builtin(name_or_path)
    if not os.path.isfile(name_or_path):
        logger.error(f"[CONFIG] {name_or_path} is neither a builtin nor a file")
        raise ConfigError([f"scenario: {name_or_path!r} is neither a builtin name nor an existing file"])

    logger.info(f"[CONFIG] Loading scenario file {name_or_path}")
    try:
        with open(name_or_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"[CONFIG] {name_or_path} is not valid JSON: {e}")
        raise ConfigError([f"scenario: {name_or_path} is not valid JSON (line {e.lineno}: {e.msg})"]) from e
    except PermissionError as e:
        logger.error(f"Permission denied reading {name_or_path}: {e}")
        raise
    return scenario_from_dict(data, source=name_or_path)


def list_scenarios() -> list[dict]:
    """One summary entry per builtin: name, strategy, lambda, steps, description and what it demonstrates."""
    entries = []
    for name, data in BUILTINS.items():
        estimator = data["estimator"]
        entries.append({
            "name": name,
            "strategy": estimator.get("strategy", "none"),
            "lambda": estimator.get("lambda", 1.0),
            "steps": data["steps"],
            "description": data["description"],
            "demonstrates": data["demonstrates"],
        })
    return entries
