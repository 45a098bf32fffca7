//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use fsl::cone::{cone_homology_at, default_depth, surgery, SurgerySpec};
use fsl::fmod::{bar_rank_profile, FiniteUPresentation, Generator, Grading, Parity};
use fsl::f2::F2Matrix;
use fsl::knotmodel::KnotModel;
use fsl::numth::{dedekind, lens_d, totient};
use fsl::obstruct::{d_sandwich, k_special, lens_complement, z_special, Conclusion, Outcome, TargetSummary};
use fsl::rational::{int, rat, Rational};
use fsl::shipped;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Check = Result<String, String>;

fn model(name: &str) -> KnotModel {
    shipped::model(name).expect("bundled").expect("valid")
}

fn cli_dim(model: &str, slope: &str) -> Result<(usize, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fsl"))
        .args(["surgery", model, slope])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!("{model} {slope}: exit {:?}", out.status.code()));
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let dim = text
        .lines()
        .find_map(|l| l.strip_prefix("dim HF_red = "))
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| format!("{model} {slope}: no aggregate line"))?;
    Ok((dim, elapsed))
}

fn dims_via_cli(model: &str, cases: &[(i64, usize)]) -> Check {
    let mut seen = Vec::new();
    for &(m, want) in cases {
        let (dim, t) = cli_dim(model, &format!("2/{m}"))?;
        if dim != want {
            return Err(format!("2/{m}: dim {dim}, expected {want}"));
        }
        if t >= Duration::from_secs(1) {
            return Err(format!("2/{m}: took {t:?}"));
        }
        seen.push(format!("2/{m}→{dim}"));
    }
    Ok(seen.join(" "))
}

fn criterion_1() -> Check {
    dims_via_cli("models/trefoil_rh_s3.json", &[(3, 1), (5, 3), (7, 5), (9, 7)])
}

fn criterion_2() -> Check {
    dims_via_cli("models/figure8_s3.json", &[(1, 1), (3, 3), (5, 5)])
}

fn criterion_3() -> Check {
    let u = model("unknot_s3");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 20 {
        let p = rng.gen_range(1..=30i64);
        let q = rng.gen_range(1..=60i64);
        if p.gcd(&q) != 1 {
            continue;
        }
        let r = surgery(&u, p, q, None).map_err(|e| e.to_string())?;
        let d: Vec<Rational> = r.d_table().into_iter().map(Grading::into_value).collect();
        if r.dim_red != 0 || d != lens_d(p, q).unwrap() {
            return Err(format!("unknot {p}/{q}"));
        }
        done += 1;
    }
    Ok("20 random slopes".into())
}

fn criterion_4() -> Check {
    let mut n = 0;
    for p in 1..=200i64 {
        for q in 1..=p {
            if p.gcd(&q) != 1 {
                continue;
            }
            let sum: Rational = lens_d(p, q).unwrap().iter().sum();
            if sum != int(p) * dedekind(q, p).unwrap() {
                return Err(format!("L({p},{q})"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} lens spaces"))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 500 {
        let p = rng.gen_range(1..5000i64);
        let q = rng.gen_range(1..5000i64);
        if p.gcd(&q) != 1 {
            continue;
        }
        let lhs = dedekind(q, p).unwrap() + dedekind(p, q).unwrap();
        let rhs = rat(-1, 4) + (rat(p, q) + rat(q, p) + rat(1, p * q)) / int(12);
        if lhs != rhs {
            return Err(format!("s({q},{p}) + s({p},{q})"));
        }
        done += 1;
    }
    Ok("500 random pairs".into())
}

fn criterion_6() -> Check {
    let mut n = 0;
    for name in shipped::MODEL_NAMES {
        let m = model(name);
        for p in 1..=12i64 {
            for q in 1..=12i64 {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let v = d_sandwich(&m, p, q, None).map_err(|e| format!("{name} {p}/{q}: {e}"))?;
                if v.outcome != Outcome::Pass {
                    return Err(format!("{name} {p}/{q}: {}", v.note));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} surgeries"))
}

fn criterion_7() -> Check {
    let cases = [("trefoil_rh_s3", vec![3, 5, 7, 9]), ("figure8_s3", vec![1, 3, 5])];
    let mut n = 0;
    for (name, qs) in cases {
        let m = model(name);
        for q in qs {
            for i in 0..2 {
                let s = SurgerySpec::new(2, q, i).unwrap();
                let depth = default_depth(&m, &s);
                let base = cone_homology_at(&m, &s, depth).map_err(|e| e.to_string())?;
                for extra in [2, 4] {
                    let other = cone_homology_at(&m, &s, depth + extra).map_err(|e| e.to_string())?;
                    if !base.same_homology(&other) {
                        return Err(format!("{name} 2/{q} i={i} at depth {}", depth + extra));
                    }
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} Spin^c cone results"))
}

fn criterion_8() -> Check {
    let t = model("trefoil_rh_s3");
    let z = fsl::obstruct::target_from_model(&t, 2, 3, None).map_err(|e| e.to_string())?;
    if z.chi_red % 2 == 0 || z.h1_order != 2 {
        return Err(format!("unexpected target {z:?}"));
    }
    for pair in [[1, 3], [3, 7], [5, 9], [1, 5]] {
        if z_special(&z, 2, &pair).outcome != Outcome::Fail {
            return Err(format!("{pair:?} not rejected"));
        }
    }
    let even = TargetSummary::new(2, 2, 2).unwrap();
    if z_special(&even, 2, &[3, 7]).outcome != Outcome::Inapplicable {
        return Err("even chi not inapplicable".into());
    }
    Ok(format!("chi = {} rejects pairs; even chi inapplicable; phi(2) = {}", z.chi_red, totient(2)))
}

fn perturbed(base: &KnotModel, edit: impl FnOnce(&mut Value)) -> KnotModel {
    let mut doc = serde_json::to_value(base.document()).unwrap();
    edit(&mut doc);
    KnotModel::from_json(&doc.to_string()).expect("perturbed model validates")
}

fn failing(m: &KnotModel, z: &TargetSummary) -> Vec<Conclusion> {
    k_special(&m.ambient, z, 2, 9, Some(m))
        .into_iter()
        .filter(|v| v.outcome == Outcome::Fail)
        .map(|v| serde_json::from_value(v.witness["conclusion"].clone()).unwrap())
        .collect()
}

fn criterion_9() -> Check {
    let base = model("sigma237_g1_synthetic");
    let z = TargetSummary::new(2, 3, 1).unwrap();
    let all = k_special(&base.ambient, &z, 2, 9, Some(&base));
    if all.len() != 4 || all.iter().any(|v| v.outcome != Outcome::Pass) {
        return Err("baseline does not pass all four conclusions".into());
    }
    let add_generator = |parity: u8, grading: &str| {
        let grading = grading.to_string();
        move |d: &mut Value| {
            let piece = &mut d["a_red"]["0"];
            piece["generators"].as_array_mut().unwrap().push(json!({"label": "extra", "grading": grading, "parity": parity}));
            piece["u_matrix"] = json!([[0, 0], [0, 0]]);
            piece["v_matrix"] = json!([[0, 0]]);
            piece["h_matrix"] = json!([[0, 0]]);
        }
    };
    let cases: [(Conclusion, &str, KnotModel); 3] = [
        (
            Conclusion::V0Zero,
            "V_0 = 1",
            perturbed(&base, |d| {
                d["V"] = json!([1, 0]);
                d["a_red"]["0"].as_object_mut().unwrap().remove("tower_offset");
            }),
        ),
        (Conclusion::EvenDimsMatch, "extra even generator", perturbed(&base, add_generator(0, "-2"))),
        (Conclusion::OddDimsMatch, "extra odd generator", perturbed(&base, add_generator(1, "-3"))),
    ];
    let mut report = Vec::new();
    let mut isolated = Vec::new();
    for (target, label, m) in &cases {
        let f = failing(m, &z);
        if f == vec![*target] {
            isolated.push(*target);
        }
        report.push(format!("{label} flips {f:?}"));
    }
    // The Alexander polynomial is derived from V_k and the Euler characteristics
    // of A_red and B_red, so there is no datum of its own to perturb.
    report.push("no datum moves the Alexander polynomial alone".into());
    if Conclusion::ALL.iter().all(|c| isolated.contains(c)) {
        Ok(report.join("; "))
    } else {
        Err(report.join("; "))
    }
}

fn criterion_10() -> Check {
    let square_free = |p: i64| (2..=p).all(|f| p % (f * f) != 0);
    let mut n = 0;
    for p in 1..=50i64 {
        for q in 1..=p {
            if p.gcd(&q) != 1 {
                continue;
            }
            for w in 0..=2 * p {
                let lc = lens_complement(p, q, w).map_err(|e| e.to_string())?;
                if square_free(p) && (w * w) % p != 0 && !lc.candidates.is_empty() {
                    return Err(format!("p={p} q={q} w={w}"));
                }
                n += 1;
            }
        }
    }
    let lc = lens_complement(4, 1, 2).map_err(|e| e.to_string())?;
    if lc.candidates != vec![-2, 0] {
        return Err(format!("(4,1,2) gives {:?}", lc.candidates));
    }
    Ok(format!("{n} triples; (4,1,2) gives {{0, -2}}"))
}

/// `rank(U^j)` by bitmask elimination, independent of the library's F₂ code.
fn brute_rank_profile(u: &[u64], n: usize) -> Vec<usize> {
    let rank = |rows: &[u64]| {
        let mut rows = rows.to_vec();
        let mut r = 0;
        for bit in 0..n {
            if let Some(i) = (r..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) {
                rows.swap(r, i);
                let pivot = rows[r];
                for (j, row) in rows.iter_mut().enumerate() {
                    if j != r && *row >> bit & 1 == 1 {
                        *row ^= pivot;
                    }
                }
                r += 1;
            }
        }
        r
    };
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter()
            .map(|&row| (0..n).filter(|&k| row >> k & 1 == 1).fold(0, |acc, k| acc ^ b[k]))
            .collect()
    };
    let mut p: Vec<u64> = (0..n).map(|i| 1 << i).collect();
    let mut out = Vec::new();
    for _ in 0..=n {
        out.push(rank(&p));
        p = mul(&p, u);
    }
    out
}

fn criterion_11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let n = rng.gen_range(1..=12usize);
        let levels: Vec<i64> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let basis: Vec<Generator> = levels
            .iter()
            .enumerate()
            .map(|(i, &l)| Generator::new(format!("g{i}"), Grading::from_int(-2 * l), Parity::Even))
            .collect();
        let density = rng.gen_range(0.2..0.9);
        let mut rows = vec![0u64; n];
        let mut m = F2Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if levels[r] == levels[c] + 1 && rng.gen_bool(density) {
                    m.set(r, c, true);
                    rows[r] |= 1 << c;
                }
            }
        }
        let pres = FiniteUPresentation::new(basis, m).map_err(|e| e.to_string())?;
        pres.validate().map_err(|e| format!("trial {trial}: {e:?}"))?;
        let from_bars = bar_rank_profile(&pres.barcode(), n);
        let brute = brute_rank_profile(&rows, n);
        if from_bars != brute {
            return Err(format!("trial {trial}: {from_bars:?} vs {brute:?}"));
        }
    }
    Ok("1000 random presentations".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("trefoil 2/m dimensions", criterion_1),
        ("figure-eight 2/n dimensions", criterion_2),
        ("unknot surgeries are lens spaces", criterion_3),
        ("lens d-invariant sum", criterion_4),
        ("Dedekind reciprocity", criterion_5),
        ("d-invariant sandwich", criterion_6),
        ("truncation stability", criterion_7),
        ("Z-special gate", criterion_8),
        ("k-special conclusions flip independently", criterion_9),
        ("lens complement slopes", criterion_10),
        ("barcode rank profiles", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let t = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({t:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({t:.2}s)", i + 1)
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
