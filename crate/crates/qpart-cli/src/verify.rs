//! Randomized and fixed-instance verification suites behind `qpart verify`.
//!
//! Each suite exercises one guarantee end to end and reports every violated
//! check as a JSON object carrying enough of the instance to replay it.

use serde_json::{json, Map, Value};

use qpart_core::classify::{
    audit_smoothness, cover_lp_value, dual_prices, Partition,
};
use qpart_core::concentration::{
    check_self_bounding, median_mean_bound_qpart, verify_isoperimetric, IsoVariant,
    ItemMarginals,
};
use qpart_core::costshare::{coalition_violation, greedy_prices};
use qpart_core::posted::{f_value, g_value, g_value_oracle, verify_minimax_step};
use qpart_core::rng::StreamRng;
use qpart_core::setfn::{gen_random_subadditive, gen_threshold, gen_xos, Valuation};
use qpart_core::{harmonic, rat, rat_int, to_f64, Rat};

use crate::io::InputError;
use crate::mc::{parallel_mc, tail_curve};

/// Outcome of one suite run: how many checks ran and which failed.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    /// Suite name as given on the command line.
    pub suite: &'static str,
    /// Number of individual checks performed.
    pub checks: u64,
    /// Summary values worth reporting even on success.
    pub details: Map<String, Value>,
    /// One replayable record per violated check.
    pub failures: Vec<Value>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport { suite, checks: 0, details: Map::new(), failures: Vec::new() }
    }

    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The report as a JSON value.
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "checks": self.checks,
            "details": self.details,
            "failures": self.failures,
            "passed": self.passed(),
        })
    }

    /// The report as plain text, one line per failure.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite {}: {} checks, {} failures: {}\n",
            self.suite,
            self.checks,
            self.failures.len(),
            if self.passed() { "pass" } else { "fail" },
        );
        for (key, value) in &self.details {
            out.push_str(&format!("  {key} = {value}\n"));
        }
        for failure in &self.failures {
            out.push_str(&format!("  {failure}\n"));
        }
        out
    }
}

fn seed_for_trial(seed: u64, trial: u64) -> u64 {
    seed.wrapping_add((trial + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_subset(rng: &mut StreamRng, m: u32) -> u32 {
    loop {
        let mask = rng.below(1 << m) as u32;
        if mask.count_ones() >= 2 {
            return mask;
        }
    }
}

fn random_partition(rng: &mut StreamRng, subset: u32, qmax: u32) -> Partition {
    let items: Vec<u32> = (0..32).filter(|i| subset & (1 << i) != 0).collect();
    let max_blocks = qmax.min(items.len() as u32).max(1);
    let wanted = 1 + rng.below(u64::from(max_blocks)) as usize;
    let mut blocks = vec![0u32; wanted];
    for &item in &items {
        blocks[rng.below(wanted as u64) as usize] |= 1 << item;
    }
    blocks.retain(|&b| b != 0);
    Partition::new(blocks).expect("blocks are disjoint and nonempty")
}

fn shuffled_items(rng: &mut StreamRng, m: u32) -> Vec<u32> {
    let mut items: Vec<u32> = (0..m).collect();
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
    items
}

fn unit_additive(m: u32) -> Valuation {
    gen_xos(m, &[vec![rat_int(1); m as usize]]).expect("unit clause is valid")
}

fn suite_instances(m: u32, q: u32) -> Result<Vec<Valuation>, InputError> {
    let tight = gen_threshold(m, &rat(i64::from(q), i64::from(q) - 1))
        .map_err(|e| InputError::new("q", e.to_string()))?;
    let slack = gen_threshold(m, &rat(i64::from(q) + 1, i64::from(q)))
        .map_err(|e| InputError::new("q", e.to_string()))?;
    Ok(vec![tight, slack, unit_additive(m)])
}

/// Audits the smoothness guarantee on threshold and additive instances:
/// every q-partitioning valuation keeps `closeness(v, q + 1) >= (q - 1)/q`.
pub fn smoothness(m: u32, q: u32) -> Result<SuiteReport, InputError> {
    if q < 2 {
        return Err(InputError::new("q", format!("q = {q} below 2")));
    }
    if q + 1 > m || m > 8 {
        return Err(InputError::new("m", format!("m = {m} outside {}..=8", q + 1)));
    }
    let mut report = SuiteReport::new("smoothness");
    let instances = suite_instances(m, q)?;
    let audit =
        audit_smoothness(&instances, q).map_err(|e| InputError::new("q", e.to_string()))?;
    report.checks = audit.rows.len() as u64;
    report.details.insert("bound".into(), json!(audit.bound.to_string()));
    if let Some(gamma) = &audit.min_gamma {
        report.details.insert("min_gamma".into(), json!(gamma.to_string()));
    }
    for (i, row) in audit.rows.iter().enumerate() {
        if !row.holds {
            report.failures.push(json!({
                "instance": i,
                "in_class": row.in_class,
                "gamma": row.gamma.to_string(),
                "bound": audit.bound.to_string(),
            }));
        }
    }
    Ok(report)
}

/// Checks primal/dual agreement of the cover LP on random subadditive
/// instances: identical optima, a feasible optimal cover, and prices that
/// violate no coalition constraint.
pub fn duality(m: u32, q: u32, trials: u64, seed: u64) -> Result<SuiteReport, InputError> {
    if !(2..=8).contains(&m) {
        return Err(InputError::new("m", format!("m = {m} outside 2..=8")));
    }
    if !(2..=8).contains(&q) {
        return Err(InputError::new("q", format!("q = {q} outside 2..=8")));
    }
    let mut report = SuiteReport::new("duality");
    for trial in 0..trials {
        let v = gen_random_subadditive(m, seed_for_trial(seed, trial))
            .expect("m is within the generator cap");
        let mut rng = StreamRng::split(seed, trial);
        let subset = random_subset(&mut rng, m);
        let part = random_partition(&mut rng, subset, q);
        let lp = cover_lp_value(&v, &part)
            .map_err(|e| InputError::new("q", e.to_string()))?;
        let (dual_value, prices) =
            dual_prices(&v, &part).map_err(|e| InputError::new("q", e.to_string()))?;
        let price_total: Rat = prices.iter().cloned().sum();
        let mut fail = |check: &str| {
            report.failures.push(json!({
                "trial": trial,
                "check": check,
                "subset": subset,
                "blocks": part.blocks(),
                "primal": lp.value.to_string(),
                "dual": dual_value.to_string(),
            }));
        };
        report.checks += 4;
        if lp.value != dual_value {
            fail("primal equals dual");
        }
        if !lp.cover.covers(part.k()) || lp.cover.value(&v, &part) != lp.value {
            fail("optimal cover is feasible and attains the optimum");
        }
        if price_total != dual_value {
            fail("prices sum to the dual optimum");
        }
        if coalition_violation(&v, &part, &prices).is_some() {
            fail("prices satisfy every coalition constraint");
        }
    }
    Ok(report)
}

/// Checks the greedy cost-sharing construction on random subadditive cost
/// functions: feasible prices recovering at least `c(S) / H_{k-1}`.
pub fn greedy(m: u32, q: u32, trials: u64, seed: u64) -> Result<SuiteReport, InputError> {
    if !(2..=12).contains(&m) {
        return Err(InputError::new("m", format!("m = {m} outside 2..=12")));
    }
    if !(2..=8).contains(&q) {
        return Err(InputError::new("q", format!("q = {q} outside 2..=8")));
    }
    let mut report = SuiteReport::new("greedy");
    for trial in 0..trials {
        let v = gen_random_subadditive(m, seed_for_trial(seed, trial))
            .expect("m is within the generator cap");
        let mut rng = StreamRng::split(seed, trial);
        let cities = q.min(m).max(2) as usize;
        let mut blocks = vec![0u32; cities];
        for (i, item) in shuffled_items(&mut rng, m).into_iter().enumerate() {
            blocks[i % cities] |= 1 << item;
        }
        let part = Partition::new(blocks).expect("round-robin blocks are valid");
        let pv = greedy_prices(&v, &part)
            .map_err(|e| InputError::new("q", e.to_string()))?;
        let target = v.value(part.subset()) / harmonic(cities as u32 - 1);
        let mut fail = |check: &str| {
            report.failures.push(json!({
                "trial": trial,
                "check": check,
                "blocks": part.blocks(),
                "total": pv.total.to_string(),
                "target": target.to_string(),
            }));
        };
        report.checks += 3;
        if !pv.feasible {
            fail("construction reports feasible");
        }
        if coalition_violation(&v, &part, &pv.prices).is_some() {
            fail("prices satisfy every coalition constraint");
        }
        if pv.total < target {
            fail("total recovers the harmonic share");
        }
    }
    Ok(report)
}

/// Checks the self-bounding certificate: q-partitioning 1-Lipschitz
/// instances pass at `a = ceil(m/q)`, and the threshold instance fails for
/// every `a` below `m/q`.
pub fn selfbounding(m: u32, q: u32) -> Result<SuiteReport, InputError> {
    if q < 2 {
        return Err(InputError::new("q", format!("q = {q} below 2")));
    }
    if m < q {
        return Err(InputError::new("m", format!("need m >= q = {q}")));
    }
    let mut report = SuiteReport::new("selfbounding");
    let a_pass = rat_int(i64::from(m.div_ceil(q)));
    let zero = rat_int(0);
    for (i, v) in suite_instances(m, q)?.iter().enumerate() {
        report.checks += 1;
        if let Err(e) = check_self_bounding(v, &a_pass, &zero) {
            report.failures.push(json!({
                "instance": i,
                "check": "passes at a = ceil(m/q)",
                "failure": format!("{e:?}"),
            }));
        }
    }
    let tight = gen_threshold(m, &rat(i64::from(q), i64::from(q) - 1))
        .map_err(|e| InputError::new("q", e.to_string()))?;
    for a in [rat(i64::from(m), i64::from(q)) - rat_int(1), rat(i64::from(m), i64::from(q)) - rat(1, 2)] {
        report.checks += 1;
        if check_self_bounding(&tight, &a, &zero).is_ok() {
            report.failures.push(json!({
                "check": "threshold instance rejected below a = m/q",
                "a": a.to_string(),
            }));
        }
    }
    Ok(report)
}

fn binary_points(dims: usize) -> Vec<Vec<usize>> {
    (0..1usize << dims)
        .map(|mask| (0..dims).map(|d| (mask >> d) & 1).collect())
        .collect()
}

fn random_sets(rng: &mut StreamRng, points: &[Vec<usize>], q: u32) -> Vec<Vec<Vec<usize>>> {
    (0..q)
        .map(|_| {
            let mut set: Vec<Vec<usize>> = points
                .iter()
                .filter(|_| rng.bit())
                .cloned()
                .collect();
            if set.is_empty() {
                set.push(points[rng.below(points.len() as u64) as usize].clone());
            }
            set
        })
        .collect()
}

/// Exhaustively checks the isoperimetric inequality on random small product
/// spaces, rotating through all four base variants.
pub fn iso(trials: u64, seed: u64) -> Result<SuiteReport, InputError> {
    let mut report = SuiteReport::new("iso");
    for trial in 0..trials {
        let mut rng = StreamRng::split(seed, trial);
        let dims = 2 + rng.below(2) as usize;
        let space = qpart_core::concentration::ProductSpace::uniform_bits(dims);
        let points = binary_points(dims);
        let q = 2 + rng.below(2) as u32;
        let sets = random_sets(&mut rng, &points, q);
        let (variant, name, s, alpha) = match trial % 4 {
            0 => {
                let s = 1 + rng.below(u64::from(q) - 1) as u32;
                (IsoVariant::General, "general", s, 1.0 / f64::from(s) + rng.next_f64())
            }
            1 => {
                let s = 1 + rng.below(u64::from(q) - 1) as u32;
                (IsoVariant::TMin, "tmin", s, 0.05 + rng.next_f64())
            }
            2 => (IsoVariant::S1, "s1", 1, 0.05 + 2.0 * rng.next_f64()),
            _ => (IsoVariant::Tau, "tau", q - 1, 1.0),
        };
        report.checks += 1;
        match verify_isoperimetric(&space, &sets, alpha, s, variant) {
            Ok(iso) if iso.holds => {}
            Ok(iso) => report.failures.push(json!({
                "trial": trial,
                "variant": name,
                "dims": dims,
                "q": q,
                "s": s,
                "alpha": alpha,
                "sets": sets,
                "lhs": iso.lhs,
                "rhs": iso.rhs,
            })),
            Err(e) => report.failures.push(json!({
                "trial": trial,
                "variant": name,
                "error": e.to_string(),
            })),
        }
    }
    Ok(report)
}

fn sample_se(dist: &qpart_core::concentration::EmpiricalDist) -> f64 {
    let n = dist.n() as f64;
    let mean = to_f64(&dist.mean());
    let mut second = 0.0;
    for (value, count) in dist.values().iter().zip(dist.counts()) {
        let x = to_f64(value);
        second += (*count as f64) * x * x;
    }
    let variance = (second / n - mean * mean).max(0.0);
    (variance / n).sqrt()
}

/// Samples q-partitioning instances under fair coin marginals and checks the
/// empirical survival function against both tail bounds, plus the
/// median-to-mean comparison, with four-sigma Monte Carlo slack.
pub fn tails(
    m: u32,
    q: u32,
    n: u64,
    seed: u64,
    threads: u32,
) -> Result<SuiteReport, InputError> {
    if !(4..=64).contains(&q) {
        return Err(InputError::new("q", format!("q = {q} outside 4..=64")));
    }
    if m < q || m > 12 {
        return Err(InputError::new("m", format!("m = {m} outside {q}..=12")));
    }
    if n < 1000 {
        return Err(InputError::new("n", format!("n = {n} below 1000")));
    }
    let r = 31 - q.leading_zeros();
    let mut report = SuiteReport::new("tails");
    report.details.insert("r".into(), json!(r));
    report.details.insert("n".into(), json!(n));
    let pi = ItemMarginals::uniform(m, 0.5).map_err(|e| InputError::new("m", e.to_string()))?;
    let instances = [
        gen_threshold(m, &rat(i64::from(q), i64::from(q) - 1))
            .map_err(|e| InputError::new("q", e.to_string()))?,
        unit_additive(m),
    ];
    for (i, v) in instances.iter().enumerate() {
        let dist = parallel_mc(v, &pi, seed, n, threads)
            .map_err(|e| InputError::new("n", e.to_string()))?;
        let rows = tail_curve(&dist, r, 1, u64::from(q))
            .map_err(|e| InputError::new("q", e.to_string()))?;
        let slack = |bound: f64| {
            let b = bound.min(1.0);
            4.0 * (b * (1.0 - b) / n as f64).sqrt()
        };
        for row in &rows {
            report.checks += 2;
            if row.empirical_survival > row.bound_qpart + slack(row.bound_qpart) {
                report.failures.push(json!({
                    "instance": i,
                    "check": "q-partitioning tail bound",
                    "x": row.x,
                    "survival": row.empirical_survival,
                    "bound": row.bound_qpart,
                }));
            }
            if row.empirical_survival > row.bound_schechtman + slack(row.bound_schechtman) {
                report.failures.push(json!({
                    "instance": i,
                    "check": "subadditive tail bound",
                    "x": row.x,
                    "survival": row.empirical_survival,
                    "bound": row.bound_schechtman,
                }));
            }
        }
        let mean = to_f64(&dist.mean());
        let med = to_f64(dist.median());
        let bound = median_mean_bound_qpart(med, q)
            .map_err(|e| InputError::new("q", e.to_string()))?;
        report.checks += 1;
        if mean > bound + 4.0 * sample_se(&dist) {
            report.failures.push(json!({
                "instance": i,
                "check": "median bounds the mean",
                "mean": mean,
                "median": med,
                "bound": bound,
            }));
        }
    }
    Ok(report)
}

/// Cross-checks the exact min-max price LP against the vertex-enumeration
/// oracle on a cap grid, then verifies the shrinking-cap step inequality on
/// XOS and threshold instances at the reference cap `1/16`.
pub fn minimax() -> Result<SuiteReport, InputError> {
    let mut report = SuiteReport::new("minimax");
    let grid_instances = [
        gen_threshold(3, &rat(3, 2)).expect("valid threshold"),
        unit_additive(2),
    ];
    for (i, v) in grid_instances.iter().enumerate() {
        for step in 0..20i64 {
            let p = rat(step, 20);
            let lp = g_value(v, &p).map_err(|e| InputError::new("p", e.to_string()))?;
            let oracle =
                g_value_oracle(v, &p).map_err(|e| InputError::new("p", e.to_string()))?;
            let (f, _) = f_value(v, &p).map_err(|e| InputError::new("p", e.to_string()))?;
            report.checks += 2;
            if lp != oracle {
                report.failures.push(json!({
                    "instance": i,
                    "check": "LP matches vertex oracle",
                    "p": p.to_string(),
                    "lp": lp.to_string(),
                    "oracle": oracle.to_string(),
                }));
            }
            if lp > f {
                report.failures.push(json!({
                    "instance": i,
                    "check": "g <= f",
                    "p": p.to_string(),
                }));
            }
        }
    }
    let step_instances = [
        gen_xos(3, &[
            vec![rat_int(1), rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1), rat_int(1)],
        ])
        .expect("valid clauses"),
        gen_threshold(4, &rat(4, 3)).expect("valid threshold"),
    ];
    let p = rat(1, 16);
    for (i, v) in step_instances.iter().enumerate() {
        let step = verify_minimax_step(v, &p, 4)
            .map_err(|e| InputError::new("q", e.to_string()))?;
        report.checks += 2;
        if !step.step_holds || !step.telescope_holds {
            report.failures.push(json!({
                "instance": i,
                "check": "shrinking-cap step inequality",
                "g_p": step.g_p.to_string(),
                "f_p": step.f_p.to_string(),
                "f_shrunk": step.f_shrunk.to_string(),
                "step_rhs": step.step_rhs.to_string(),
            }));
        }
        let (f, _) = f_value(v, &p).map_err(|e| InputError::new("p", e.to_string()))?;
        if &f * rat_int(16) < *v.value(v.ground_set()) {
            report.failures.push(json!({
                "instance": i,
                "check": "f(1/16) covers a sixteenth of the grand bundle",
                "f": f.to_string(),
            }));
        }
    }
    Ok(report)
}
