//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::fixtures::heisenberg_type;
use common::oracles::{evaluate_on_matrices, matrix_bch_components, random_strict_upper};
use common::series::{bad_series, random_series};
use common::{field, imat, r};
use isolab::bch::{
    bch_series, denominator_profile, lattice_closure_check, random_lattice_vector, random_rho_inputs, rho_defect,
    MinimalSlopeSplitting,
};
use isolab::dieudonne::{pdiv_dimension, random_negative_slope_dla, DieudonneLieAlgebra};
use isolab::perfected::{
    compose, rigidity_check, FiniteField, MembershipMethod, OrdinaryPolynomial, PerfectedSeries, PoweredBlock,
    RestrictedParams,
};
use isolab::roots::{enumerate_cocharacters, GroupType, RootDatumWithCochar};
use isolab::{Isocrystal, Mat, SlopeMultiset};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(e) => (false, e),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {id:>2} {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    ok
}

fn slope_normalization() -> Verdict {
    for p in [2, 3, 5, 7] {
        let s = field(p, 1, 16);
        let one = Isocrystal::diagonal_powers(&s, &[0]).newton_slopes().map_err(|e| e.to_string())?;
        let inv = Isocrystal::diagonal_powers(&s, &[-1]).newton_slopes().map_err(|e| e.to_string())?;
        ensure(one == SlopeMultiset::from_pairs([(r(0, 1), 1)]), format!("F = 1 gives {one} at p = {p}"))?;
        ensure(inv == SlopeMultiset::from_pairs([(r(-1, 1), 1)]), format!("F = 1/p gives {inv} at p = {p}"))?;
    }
    Ok("F = 1 has slope 0 and F = 1/p has slope -1 for p in {2, 3, 5, 7}".into())
}

fn supersingular() -> Verdict {
    for p in [2, 3, 5] {
        let s = field(p, 1, 24);
        let f = Mat::from_i64_ratios(&s, &[&[(0, 1), (1, p as i64)], &[(1, 1), (0, 1)]]);
        let iso = Isocrystal::new(f).map_err(|e| e.to_string())?;
        let slopes = iso.newton_slopes().map_err(|e| e.to_string())?;
        ensure(slopes == SlopeMultiset::from_pairs([(r(-1, 2), 2)]), format!("slopes {slopes} at p = {p}"))?;
        let blocks = iso.slope_split().map_err(|e| e.to_string())?;
        ensure(
            blocks.len() == 1 && blocks[0].slope == r(-1, 2) && blocks[0].rank() == 2,
            format!("{} blocks at p = {p}", blocks.len()),
        )?;
    }
    Ok("{(-1/2, 2)} with one isoclinic block of rank 2 for p in {2, 3, 5}".into())
}

fn dimension_identity() -> Verdict {
    let cases: &[(GroupType, &[usize])] =
        &[(GroupType::GL, &[1, 2, 3, 4]), (GroupType::GSp, &[2, 4]), (GroupType::SO, &[3, 4, 5, 6])];
    let mut count = 0;
    let mut outside = 0;
    for &(g, ns) in cases {
        for &n in ns {
            for d in enumerate_cocharacters(g, n, &[0, -1, -2]) {
                count += 1;
                let slopes = d.slope_multiset();
                let expected = match pdiv_dimension(&slopes) {
                    Ok(x) => x,
                    Err(_) => {
                        outside += 1;
                        -slopes.weighted_sum()
                    }
                };
                ensure(
                    d.leaf_dimension() == expected,
                    format!("{g}({n}) nu = {:?}: <2rho, nu> = {} but {expected}", d.nu(), d.leaf_dimension()),
                )?;
                d.dimension_identity().map_err(|e| e.to_string())?;
            }
        }
    }
    let gsp = RootDatumWithCochar::new(GroupType::GSp, 4, vec![r(0, 1), r(0, 1), r(-1, 1), r(-1, 1)]);
    let gl2 = RootDatumWithCochar::new(GroupType::GL, 2, vec![r(0, 1), r(-1, 1)]);
    let gsp = gsp.map_err(|e| e.to_string())?.leaf_dimension();
    let gl2 = gl2.map_err(|e| e.to_string())?.leaf_dimension();
    ensure(gsp == r(3, 1) && gl2 == r(1, 1), format!("GSp(4) ordinary {gsp}, GL(2) {gl2}"))?;
    Ok(format!(
        "{count} root data agree ({outside} with slopes below -1 compared with the slope sum); GSp(4) ordinary = 3, GL(2) = 1"
    ))
}

fn adjoint_cross_check() -> Verdict {
    let data: Vec<RootDatumWithCochar> =
        (1..=4).flat_map(|n| enumerate_cocharacters(GroupType::GL, n, &[0, -1, -2])).collect();
    let failures: Vec<String> = data
        .par_iter()
        .filter_map(|d| {
            let spec = field(3, 1, d.adjoint_working_precision());
            let got = d.diagonal_b(&spec).and_then(|b| d.adjoint_negative_slopes(&b));
            match got {
                Ok(s) if s == d.slope_multiset() => None,
                Ok(s) => Some(format!("nu = {:?}: adjoint {s}, roots {}", d.nu(), d.slope_multiset())),
                Err(e) => Some(format!("nu = {:?}: {e}", d.nu())),
            }
        })
        .collect();
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(format!("{} GL cocharacters with n <= 4 match", data.len()))
}

fn bch_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for c in 1..=5 {
        let z = bch_series(c).map_err(|e| e.to_string())?;
        for _ in 0..4 {
            let a = random_strict_upper(c + 1, &mut rng);
            let b = random_strict_upper(c + 1, &mut rng);
            let expected = matrix_bch_components(&a, &b, c);
            for k in 1..=c {
                ensure(
                    evaluate_on_matrices(&z.degree_part(k), &a, &b) == expected[k - 1],
                    format!("c = {c}, degree {k}"),
                )?;
            }
        }
        let primes: BTreeSet<u64> = (2..=c as u64).filter(|&q| (2..q).all(|d| q % d != 0)).collect();
        let profile = denominator_profile(c).map_err(|e| e.to_string())?;
        ensure(profile.is_subset(&primes), format!("c = {c}: denominators {profile:?}"))?;
    }
    Ok("degrees 1..5 match log(exp A exp B) on random nilpotent matrices; denominators only involve primes <= c".into())
}

fn heisenberg(p: u64) -> DieudonneLieAlgebra {
    let s = field(p, 1, 24);
    common::fixtures::heisenberg(&s, Some(Mat::identity(&s, 3)))
}

fn lattice_closure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = heisenberg(5);
    let lat = a.lattice().unwrap();
    let pairs: Vec<_> =
        (0..100).map(|_| (random_lattice_vector(lat, 4, &mut rng), random_lattice_vector(lat, 4, &mut rng))).collect();
    let closed = lattice_closure_check(&a, &pairs).map_err(|e| e.to_string())?;
    ensure(closed.closed, "p = 5 found a product outside the lattice")?;
    let b = heisenberg(2);
    let lat = b.lattice().unwrap();
    let pairs: Vec<_> =
        (0..100).map(|_| (random_lattice_vector(lat, 4, &mut rng), random_lattice_vector(lat, 4, &mut rng))).collect();
    let open = lattice_closure_check(&b, &pairs).map_err(|e| e.to_string())?;
    ensure(!open.closed && open.witness.is_some(), "p = 2 found no counterexample")?;
    Ok(format!(
        "p = 5 closed on {} pairs (100 random); p = 2 counterexample after {} pairs",
        closed.pairs_checked, open.pairs_checked
    ))
}

fn rho_containment() -> Verdict {
    let s = field(5, 1, 24);
    let a = heisenberg_type(&s, Some(imat(&s, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])));
    let split = MinimalSlopeSplitting::new(&a).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 0..4 {
        for i in 0..50 {
            let (xp, x) = random_rho_inputs(&a, &split, n, &mut rng).map_err(|e| e.to_string())?;
            let rep = rho_defect(&a, &split, &xp, &x, n).map_err(|e| e.to_string())?;
            ensure(rep.contained, format!("n = {n}, sample {i}: defect outside p^-n b+"))?;
        }
    }
    Ok("200 defects lie in p^-n b+ for n = 0..3 at p = 5".into())
}

fn centrality() -> Verdict {
    const SAMPLES: u64 = 500;
    let results: Vec<Result<(bool, bool), String>> = (0..SAMPLES)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let s = field([2, 3, 5, 7][i as usize % 4], 1 + (i as usize / 4) % 2, 24);
            let a = random_negative_slope_dla(&s, &mut rng).map_err(|e| format!("sample {i}: {e}"))?;
            let valid = a.validate().map_err(|e| e.to_string())?.bracket_laws_hold();
            let central = a.minimal_slope_center_check().map_err(|e| format!("sample {i}: {e}"))?.central;
            let nonabelian = a.nilpotency_class().map_err(|e| e.to_string())? > 1;
            if !valid {
                return Err(format!("sample {i} violates the bracket laws"));
            }
            if !central {
                return Err(format!("sample {i}: minimal slope part is not central"));
            }
            Ok((central, nonabelian))
        })
        .collect();
    let mut nonabelian = 0;
    for r in results {
        if r?.1 {
            nonabelian += 1;
        }
    }
    Ok(format!("{SAMPLES} random algebras ({nonabelian} nonabelian) have central minimal slope part"))
}

fn restricted_membership() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut members = 0;
    let mut boundary = 0;
    for i in 0..1000 {
        let p = [2, 3][i % 2];
        let field = FiniteField::new(p, 1).unwrap();
        let rr = rng.gen_range(1..=3);
        let params = RestrictedParams::new(rr + rng.gen_range(1..=3), rr, rng.gen_range(0..=2)).unwrap();
        let a = random_series(&field, 1 + i % 3, 8, 4, rng.gen_range(1..=8), &mut rng);
        let report = a.membership_restricted(params, MembershipMethod::Both).map_err(|e| format!("sample {i}: {e}"))?;
        ensure(report.disagreements.is_empty(), format!("sample {i} disagrees"))?;
        if report.member() {
            members += 1;
        }
        boundary += report.boundary_terms.len();
    }
    let params = RestrictedParams::new(2, 1, 0).unwrap();
    let bad = bad_series(16).membership_restricted(params, MembershipMethod::Both).map_err(|e| e.to_string())?;
    ensure(
        !bad.definitional.as_ref().unwrap().member && !bad.closed_form.as_ref().unwrap().member,
        "the sum of X^(i + 1/2^i) was accepted",
    )?;
    for i in 0..200 {
        let p = [2, 3, 5][i % 3];
        let field = FiniteField::new(p, 1 + i % 2).unwrap();
        let a = random_series(&field, 1 + i % 3, 8, 0, 6, &mut rng);
        let rr = rng.gen_range(1..=3);
        let params = RestrictedParams::new(rr + rng.gen_range(1..=3), rr, rng.gen_range(0..=2)).unwrap();
        let ok = a.membership_restricted(params, MembershipMethod::Both).map_err(|e| e.to_string())?.member();
        ensure(ok, format!("ordinary series {i} rejected"))?;
    }
    Ok(format!(
        "1000 random series agree ({members} members, {boundary} boundary terms reported); bad series rejected by both; 200 ordinary series accepted"
    ))
}

fn rigidity() -> Verdict {
    let f2 = FiniteField::new(2, 1).unwrap();
    let x =
        |num: i64, den: i64| PerfectedSeries::variable_power(&f2, 1, r(8, 1), 0, Rational64::new(num, den)).unwrap();
    let poly = OrdinaryPolynomial::from_int_terms(&f2, 3, &[(&[1, 0, 0], 1), (&[0, 2, 0], -1)]).unwrap();
    let g = [x(1, 1), x(1, 2)];
    let h = [x(1, 1)];
    let pos = rigidity_check(&poly, &g, &h, 1, &[1, 3, 7], PoweredBlock::G).map_err(|e| e.to_string())?;
    ensure(pos.all_congruences_pass() && pos.evaluation_zero, "positive instance failed")?;
    // u - v with g = h is zero on the diagonal only
    let diff = OrdinaryPolynomial::from_int_terms(&f2, 2, &[(&[1, 0], 1), (&[0, 1], -1)]).unwrap();
    ensure(compose(&diff, &h, &h).map_err(|e| e.to_string())?.is_zero(), "u - v at g = h is nonzero")?;
    let u = OrdinaryPolynomial::from_int_terms(&f2, 1, &[(&[1], 1)]).unwrap();
    let d_seq = [1, 3, 7];
    let neg = rigidity_check(&u, &[x(1, 1)], &[], 1, &d_seq, PoweredBlock::G).map_err(|e| e.to_string())?;
    let expected = d_seq.iter().enumerate().find(|&(n, &d)| d > 2u64.pow(n as u32)).map(|(n, _)| n);
    ensure(
        neg.first_failure == expected && !neg.evaluation_zero,
        format!("negative instance: {:?}", neg.first_failure),
    )?;
    let flat = rigidity_check(&u, &[x(1, 1)], &[], 1, &[2, 4, 8], PoweredBlock::G).map_err(|e| e.to_string())?;
    ensure(!flat.ratio_ok, "d_n = q^(n+1) not flagged")?;
    Ok(format!(
        "f = u1 - u2^2 at g = (X, X^(1/2)) passes and vanishes; f = u fails first at n = {}; d_n = q^(n+1) flagged",
        expected.unwrap()
    ))
}

fn coxeter_gate() -> Verdict {
    let cases: Vec<(GroupType, usize)> =
        (1..=5).map(|n| (GroupType::GL, n)).chain((1..=3).map(|g| (GroupType::GSp, 2 * g))).collect();
    let data: Vec<RootDatumWithCochar> =
        cases.iter().flat_map(|&(g, n)| enumerate_cocharacters(g, n, &[0, -1, -2, -3])).collect();
    let failures: Vec<String> = data
        .par_iter()
        .filter_map(|d| match d.coxeter_gate(2) {
            Ok(gate) if gate.n_class < gate.h => None,
            Ok(gate) => {
                Some(format!("{}({}) {:?}: class {} with h = {}", d.group(), d.n(), d.nu(), gate.n_class, gate.h))
            }
            Err(e) => Some(format!("{}({}) {:?}: {e}", d.group(), d.n(), d.nu())),
        })
        .collect();
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(format!("{} cocharacters of GL(n <= 5) and GSp(2g <= 6) have class <= h - 1", data.len()))
}

fn cli_commands(corpus: &Path) -> Vec<Vec<String>> {
    let c = |f: &str| corpus.join(f).to_string_lossy().into_owned();
    let raw: Vec<Vec<String>> = vec![
        vec!["slopes".into(), "--in".into(), c("ordinary2x2.json")],
        vec!["slopes".into(), "--in".into(), c("supersingular.json")],
        vec!["slopes".into(), "--in".into(), c("slopes_batch.json")],
        vec!["slopes".into(), "--classical".into(), "--in".into(), c("mixed4.json")],
        vec!["split".into(), "--in".into(), c("mixed4.json")],
        vec!["hom".into(), "--in".into(), c("hom_pair.json")],
        vec!["dla-check".into(), "--in".into(), c("heisenberg.json")],
        vec!["dla-check".into(), "--in".into(), c("heisenberg_type.json")],
        vec!["lcs".into(), "--in".into(), c("heisenberg_type.json")],
        vec!["bch-table".into(), "--degree".into(), "6".into()],
        vec!["bch-mul".into(), "--in".into(), c("bch_mul_heisenberg.json")],
        vec!["lattice-closure".into(), "--in".into(), c("heisenberg.json")],
        vec!["lattice-closure".into(), "--in".into(), c("heisenberg_p2.json")],
        vec![
            "leafdim".into(),
            "--type".into(),
            "GSp".into(),
            "--n".into(),
            "4".into(),
            "--nu".into(),
            "1,1,0,0".into(),
            "--classical".into(),
        ],
        vec![
            "slope-roots".into(),
            "--type".into(),
            "GL".into(),
            "--n".into(),
            "3".into(),
            "--nu".into(),
            "0,-1,-2".into(),
            "--adjoint-p".into(),
            "3".into(),
        ],
        vec![
            "nilclass".into(),
            "--type".into(),
            "SO".into(),
            "--n".into(),
            "5".into(),
            "--nu".into(),
            "0,-1,-2,-3,-4".into(),
        ],
        vec![
            "coxeter-gate".into(),
            "--type".into(),
            "GSp".into(),
            "--n".into(),
            "4".into(),
            "--nu".into(),
            "0,-1,-2,-3".into(),
            "--p".into(),
            "5".into(),
        ],
        vec!["perf-member".into(), "--params".into(), "2,1,0".into(), "--in".into(), c("badseries.json")],
        vec!["perf-member".into(), "--params".into(), "3,1,1".into(), "--in".into(), c("ordinary_series.json")],
        vec![
            "perf-ecd".into(),
            "--E".into(),
            "1".into(),
            "--C".into(),
            "3".into(),
            "--d".into(),
            "1".into(),
            "--in".into(),
            c("root_p.json"),
        ],
        vec!["perf-ecd".into(), "--E".into(), "1".into(), "--C".into(), "2".into(), "--in".into(), c("badseries.json")],
        vec!["rigidity".into(), "--in".into(), c("rigidity_positive.json")],
        vec!["rigidity".into(), "--in".into(), c("rigidity_negative.json")],
        vec!["rigidity".into(), "--in".into(), c("rigidity_ratio.json")],
        vec!["slope-exponents".into(), "--mu1".into(), "1/2".into(), "--mu0".into(), "1/3".into()],
        vec!["slope-exponents".into(), "--mu1".into(), "1/2".into(), "--mu0".into(), "1/2".into()],
    ];
    raw
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_isolab");
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let commands = cli_commands(&corpus);
    let subcommands: BTreeSet<&str> = commands.iter().map(|c| c[0].as_str()).collect();
    ensure(subcommands.len() == 16, format!("only {} subcommands exercised", subcommands.len()))?;
    let invoke = |args: &[String]| {
        Command::new(bin).args(args).env_remove("ISOLAB_PRECISION").output().map_err(|e| e.to_string())
    };
    for args in &commands {
        let first = invoke(args)?;
        let second = invoke(args)?;
        ensure(first.stdout == second.stdout && first.status == second.status, format!("{args:?} differs"))?;
        let code = first.status.code().unwrap_or(-1);
        ensure(code == 0 || code == 2, format!("{args:?} exited with {code}"))?;
        let text = String::from_utf8(first.stdout).map_err(|e| e.to_string())?;
        serde_json::from_str::<serde_json::Value>(&text).map_err(|e| format!("{args:?}: {e}"))?;
    }
    Ok(format!("{} invocations over all 16 subcommands are byte-identical across two runs", commands.len()))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "slope normalization", secs(1), slope_normalization),
        run(2, "supersingular slopes", secs(1), supersingular),
        run(3, "dimension identity", secs(10), dimension_identity),
        run(4, "adjoint cross-check", secs(30), adjoint_cross_check),
        run(5, "BCH correctness", secs(30), bch_correctness),
        run(6, "lattice closure gate", secs(5), lattice_closure),
        run(7, "rho-defect containment", secs(10), rho_containment),
        run(8, "centrality of the minimal slope part", secs(60), centrality),
        run(9, "restricted-perfection membership", secs(60), restricted_membership),
        run(10, "rigidity checker", secs(5), rigidity),
        run(11, "Coxeter gate", secs(60), coxeter_gate),
        run(12, "CLI determinism", secs(60), determinism),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
