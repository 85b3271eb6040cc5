"""Compare the zb-rashba <ybar> trembling frequency against both closed-form candidates.

Prints the measured frequency, each candidate with its relative error, and
the numeric-vs-analytic correlation over the first period for each form.
"""

import math

from iontraj import analytic as an
from iontraj.analysis import compare
from iontraj.presets import preset
from iontraj.runner import curve_record, simulate
from iontraj.validation import zb_frequency_arbitration


def main():
    cfg = preset("zb-rashba")
    rec = simulate(cfg)
    arb = zb_frequency_arbitration(rec)
    print(f"measured  {arb.measured:.6f} cycles/tau")
    for form, f in arb.candidates.items():
        params = cfg.analytic.params
        period = 2 * math.pi / an.eq8_frequency(params, form)
        curve = an.traj_eq8(params, rec.tau, frequency=form)
        corr = compare(rec, curve_record(curve), ("y",), tau_range=(0.0, period)).correlation["y"]
        print(f"{form:9s} {f:.6f} cycles/tau  rel. error {arb.errors[form]:.2%}  first-period corr {corr:.4f}")
    print(f"winner: {arb.winner} (library default: {an.DEFAULT_FREQUENCY_FORM})")


if __name__ == "__main__":
    main()
