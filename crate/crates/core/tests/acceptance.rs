//! Acceptance gate: one test per shipped claim, each emitting a single
//! `[PASS]`/`[FAIL]` line with the measured quantity and its pinned
//! threshold. Run with `--nocapture` to see the lines for passing tests
//! as well.

use std::time::Instant;

use retime::scenario::{builtin, builtin_catalog, RequestedCheck};
use retime::sdd::{integrate, picard_reference, InitialData, Params, SddSolution};
use retime::transform::build_time_map;
use retime::transformed::{integrate_transformed, process_restart_check};
use retime::verify::{
    alpha_convergence_experiment, continuous_dependence_experiment, stability_transfer_check,
    verify_equivalence, Claim,
};

fn conclude(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{verdict}] {criterion}: {detail}");
    assert!(pass, "[{verdict}] {criterion}: {detail}");
}

fn mesh(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

fn compiled(name: &str) -> (Params<f64>, InitialData<f64>) {
    let s = builtin(name).expect("catalog entry");
    let params = s.params().expect("params");
    let init = s.initial_data(&params).expect("initial data");
    (params, init)
}

fn direct(name: &str) -> SddSolution<f64> {
    let s = builtin(name).expect("catalog entry");
    let (params, init) = compiled(name);
    integrate(&params, &init, s.t_end, s.dt).expect("direct solve")
}

/// Least-squares fit of `ln y = intercept − rate·x`; returns the decay
/// rate and the coefficient of determination.
fn fitted_decay(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let logs: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let l_mean = logs.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&x, &l) in xs.iter().zip(&logs) {
        cov += (x - x_mean) * (l - l_mean);
        var += (x - x_mean) * (x - x_mean);
    }
    let slope = cov / var;
    let intercept = l_mean - slope * x_mean;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &l) in xs.iter().zip(&logs) {
        ss_res += (l - intercept - slope * x) * (l - intercept - slope * x);
        ss_tot += (l - l_mean) * (l - l_mean);
    }
    (-slope, 1.0 - ss_res / ss_tot)
}

#[test]
fn c01_round_trip_equivalence() {
    let clock = Instant::now();
    let mut s = builtin("reference-oscillator").unwrap();
    s.dt = 1e-3;
    s.ds = 1e-3;
    let params = s.params().unwrap();
    let init = s.initial_data(&params).unwrap();
    let seed = s.seed(&params, &init).unwrap();
    let sol = integrate(&params, &init, s.t_end, s.dt).unwrap();
    let ts = integrate_transformed(&params, &init, &seed, s.s_end - s.s0, s.ds).unwrap();
    let report = verify_equivalence(&sol, &ts, 2000).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let state = report.find(Claim::StateRebase).next().expect("state check");
    let delay = report.find(Claim::DelayRebase).next().expect("delay check");
    let pass = report.all_pass() && state.observed <= 1e-5 && delay.observed <= 1e-5 && elapsed < 5.0;
    conclude(
        "round-trip equivalence",
        pass,
        &format!(
            "sup|z-y∘α| = {:.3e}, sup|χ-η∘α| = {:.3e} (tolerance 1e-5), runtime {elapsed:.2}s (limit 5s)",
            state.observed, delay.observed
        ),
    );
}

#[test]
fn c02_delay_band_invariant() {
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    let catalog = builtin_catalog();
    for s in &catalog {
        let run = direct(&s.name);
        let band_hi = s.lag();
        for t in run.delay().node_times() {
            let eta = run.delay().eval_scalar(t).unwrap();
            worst_low = worst_low.min(eta);
            worst_high = worst_high.min(band_hi - eta);
        }
    }
    let pass = worst_low >= -1e-9 && worst_high >= -1e-9;
    conclude(
        "delay band invariant",
        pass,
        &format!(
            "min η = {worst_low:.3e}, min (2η̄-η) = {worst_high:.3e} across {} scenarios (tolerance -1e-9)",
            catalog.len()
        ),
    );
}

#[test]
fn c03_deviating_slope_floor() {
    let mut worst_margin = f64::INFINITY;
    let catalog = builtin_catalog();
    for s in &catalog {
        let run = direct(&s.name);
        let floor = run.params().deviating_slope_floor().expect("certificate holds across the catalog");
        for t in run.delay().node_times() {
            let sigma_rate = 1.0 - run.delay().eval_derivative_scalar(t).unwrap();
            worst_margin = worst_margin.min(sigma_rate - floor);
        }
    }
    let pass = worst_margin >= -1e-6;
    conclude(
        "deviating-argument slope floor",
        pass,
        &format!(
            "min σ' - (1-2μη̄) = {worst_margin:.3e} across {} scenarios (tolerance -1e-6)",
            catalog.len()
        ),
    );
}

#[test]
fn c04_growth_envelopes() {
    let mut worst_upper = f64::INFINITY;
    let mut worst_lower = f64::INFINITY;
    let mut maps = 0;
    let mut floors = 0;
    for s in builtin_catalog() {
        if !s.checks.contains(&RequestedCheck::Equivalence) {
            continue;
        }
        let params = s.params().unwrap();
        let init = s.initial_data(&params).unwrap();
        let seed = s.seed(&params, &init).unwrap();
        let sol = integrate(&params, &init, s.t_end, s.dt).unwrap();
        let map = build_time_map(&sol, &seed, s.s_end, s.ds).unwrap();
        maps += 1;
        worst_upper = worst_upper.min(map.growth_margins(None).unwrap().upper);
        // Certified delay floor, when the declared coupling budget leaves
        // room for one and the datum starts above it.
        let bounds = params.bounds();
        let h1 = params.rest_delay() - bounds.coupling_sup / params.relaxation_rate();
        if h1 > 0.0 && init.initial_delay() >= h1 {
            assert!(params.delay_floor_certificate(h1).unwrap());
            floors += 1;
            let margins = map.growth_margins(Some(h1)).unwrap();
            worst_lower = worst_lower.min(margins.lower.unwrap());
        }
    }
    let pass = worst_upper >= -1e-9 && worst_lower >= -1e-9;
    conclude(
        "growth envelopes of the map",
        pass,
        &format!(
            "min upper margin = {worst_upper:.3e} over {maps} maps, min floor margin = {worst_lower:.3e} over {floors} certified floors (tolerance -1e-9)"
        ),
    );
}

#[test]
fn c05_constant_delay_degeneration() {
    let s = builtin("constant-delay").unwrap();
    let params = s.params().unwrap();
    let init = s.initial_data(&params).unwrap();
    let seed = s.seed(&params, &init).unwrap();
    let sol = integrate(&params, &init, s.t_end, s.dt).unwrap();
    let built = build_time_map(&sol, &seed, s.s_end, s.ds).unwrap();
    let marched = integrate_transformed(&params, &init, &seed, s.s_end - s.s0, s.ds).unwrap();
    let mut sup = 0.0f64;
    for s_probe in mesh(s.s0, s.s_end, 2000) {
        let exact = s.t0 + 0.5 * (s_probe - s.s0);
        sup = sup.max((built.to_original(s_probe).unwrap() - exact).abs());
        sup = sup.max((marched.alpha().to_original(s_probe).unwrap() - exact).abs());
    }
    conclude(
        "constant-delay degeneration",
        sup <= 1e-8,
        &format!("sup|α(s) - (s-s0)/2| = {sup:.3e} over ten lags, both constructions (tolerance 1e-8)"),
    );
}

#[test]
fn c06_dependence_bound() {
    let (params, init) = compiled("reference-oscillator");
    let report = continuous_dependence_experiment(&params, &init, &[1e-2, 1e-3, 1e-4], 2.0, 1e-3).unwrap();
    let bound_checks: Vec<_> = report.checks.iter().filter(|c| c.claim == Claim::DependenceBound).collect();
    let scaling: Vec<_> = report.checks.iter().filter(|c| c.claim == Claim::DependenceScaling).collect();
    let worst = bound_checks.iter().map(|c| c.observed / c.threshold).fold(0.0f64, f64::max);
    let pass = report.all_pass() && bound_checks.len() == 3 && !scaling.is_empty();
    conclude(
        "continuous-dependence bound",
        pass,
        &format!(
            "{} deltas all under the declared-constant bound (worst observed/bound = {worst:.3e}), {} scaling ratios within factor 2 of linear",
            bound_checks.len(),
            scaling.len()
        ),
    );
}

#[test]
fn c07_map_convergence_under_datum_perturbation() {
    let s = builtin("reference-oscillator").unwrap();
    let params = s.params().unwrap();
    let init = s.initial_data(&params).unwrap();
    let seed = s.seed(&params, &init).unwrap();
    let report = alpha_convergence_experiment(&params, &init, &seed, &[1e-2, 1e-3, 1e-4], 4.0, 1e-2).unwrap();
    let slopes = report.checks.iter().filter(|c| c.claim == Claim::MapSlopePositive).count();
    let pairs = report.checks.iter().filter(|c| c.claim == Claim::MapConvergence).count();
    let pass = report.all_pass() && slopes == 3 && pairs == 2;
    conclude(
        "map convergence under datum perturbation",
        pass,
        &format!("sup|α_δ-α| monotone over {pairs} ladder steps, slope positive for all {slopes} perturbed maps"),
    );
}

#[test]
fn c08_fixed_point_oracle_agreement() {
    let (params, init) = compiled("reference-oscillator");
    let t_end = init.t0() + params.lag();
    let rk4 = integrate(&params, &init, t_end, 1e-3).unwrap();
    let picard = picard_reference(&params, &init, t_end, 12, 1e-3).unwrap();
    let mut sup = 0.0f64;
    for t in mesh(init.t0(), t_end, 2000) {
        let dy = rk4.state().eval_scalar(t).unwrap() - picard.solution.state().eval_scalar(t).unwrap();
        let de = rk4.delay().eval_scalar(t).unwrap() - picard.solution.delay().eval_scalar(t).unwrap();
        sup = sup.max(dy.abs()).max(de.abs());
    }
    conclude(
        "fixed-point oracle agreement",
        sup <= 1e-6,
        &format!("sup distance between the stepping solve and 12 integral-equation sweeps = {sup:.3e} over one lag (tolerance 1e-6)"),
    );
}

#[test]
fn c09_restart_reproducibility() {
    let s = builtin("reference-oscillator").unwrap();
    let params = s.params().unwrap();
    let init = s.initial_data(&params).unwrap();
    let seed = s.seed(&params, &init).unwrap();
    let report = process_restart_check(&params, &init, &seed, 4.0, s.s_end - s.s0, s.ds).unwrap();
    let distance = report.max_distance();
    conclude(
        "mid-course restart reproducibility",
        distance <= 1e-8,
        &format!("restart at s = 4 reproduces the uninterrupted march to {distance:.3e} (tolerance 1e-8)"),
    );
}

#[test]
fn c10_stability_transfer() {
    let s = builtin("decaying-linear").unwrap();
    let params = s.params().unwrap();
    let init = s.initial_data(&params).unwrap();
    let seed = s.seed(&params, &init).unwrap();
    let sol = integrate(&params, &init, s.t_end, s.dt).unwrap();
    let ts = integrate_transformed(&params, &init, &seed, s.s_end - s.s0, s.ds).unwrap();

    let t_tail = mesh(0.5 * s.t_end, s.t_end, 160);
    let norms_t: Vec<f64> = t_tail.iter().map(|&t| sol.state().eval_scalar(t).unwrap().abs()).collect();
    let (rate_t, r2_t) = fitted_decay(&t_tail, &norms_t);
    let s_tail = mesh(0.5 * s.s_end, s.s_end, 160);
    let norms_s: Vec<f64> = s_tail.iter().map(|&x| ts.state().eval_scalar(x).unwrap().abs()).collect();
    let (rate_s, r2_s) = fitted_decay(&s_tail, &norms_s);

    let ratio = rate_s / rate_t;
    let transfer = stability_transfer_check(&sol, &ts).unwrap();
    let pass = (ratio - 0.5).abs() <= 0.025 && r2_t >= 0.99 && r2_s >= 0.99 && transfer.all_pass();
    conclude(
        "stability transfer across the map",
        pass,
        &format!(
            "fitted transformed/original rate ratio = {ratio:.4} (target 0.5 ± 5%), fit R² = {r2_t:.6}/{r2_s:.6} (minimum 0.99), transfer checks all pass"
        ),
    );
}

#[test]
fn c11_convergence_order() {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["manifold-compatible", "decaying-linear"] {
        let (params, init) = compiled(name);
        let t_end = init.t0() + 3.0;
        let reference = integrate(&params, &init, t_end, 0.025 / 8.0).unwrap();
        let error_at = |dt: f64| -> f64 {
            let run = integrate(&params, &init, t_end, dt).unwrap();
            mesh(init.t0(), t_end, 300)
                .into_iter()
                .map(|t| (run.state().eval_scalar(t).unwrap() - reference.state().eval_scalar(t).unwrap()).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = error_at(0.025);
        let fine = error_at(0.0125);
        let ratio = coarse / fine;
        pass &= (10.0..=22.0).contains(&ratio);
        details.push(format!("{name}: error {coarse:.3e} → {fine:.3e}, ratio {ratio:.1}"));
    }
    conclude(
        "fourth-order convergence on smooth compatible data",
        pass,
        &format!("step halving vs dt/8 reference, ratio window [10, 22] — {}", details.join("; ")),
    );
}
