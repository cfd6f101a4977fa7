//! Command line over the factorization and path-building library.
//!
//! Every subcommand prints one `key=value` record per result line followed
//! by a final `ok=true|false` summary.  Numeric results are exact rationals
//! `p/q`.  Exit status is 0 on success, 1 on a constraint violation (with a
//! machine-readable `error=<code>` line), and 2 on malformed input.  The
//! only source of randomness is the `--seed` argument of `verify`.

use clap::{Parser, Subcommand};
use std::process::ExitCode;

use bimetric_core::classical_decomp::{
    factor_isometry_block, factor_symplectic, BlockElement, FactorPayload, FactorTag, GroupTag,
    SubgroupFactor,
};
use bimetric_core::field_core::Matrix;
use bimetric_core::forms::{witt_extend, FormKind, FormSpace};
use bimetric_core::geodesic_builder::{
    dyadic_path, path_deviation, DistanceKind, MetricGroupContext, PathElement,
};
use bimetric_core::linear_split::{normalize_by_e, split_sl};
use bimetric_core::perm_split::{split_even, support_count};
use bimetric_core::Rational;
use num_traits::{One, Signed};

use bimetric_cli::{text, verify};

#[derive(Parser)]
#[command(name = "bimetric", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split an even permutation into two even factors with prescribed
    /// support masses.
    SplitPerm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Split a determinant-one matrix with prescribed eigenvalue-defect
    /// ranks.
    SplitSl {
        #[arg(long)]
        field: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    /// Factor an invertible matrix as a scaling-subgroup element times a
    /// balanced matrix.
    NormalizeE {
        #[arg(long)]
        field: String,
        #[arg(long)]
        a: String,
    },
    /// Factor a symplectic block element into three unipotent factors and a
    /// block-diagonal one.
    FactorSp {
        #[arg(long)]
        field: String,
        #[arg(long)]
        g: String,
    },
    /// Factor a unitary or split-orthogonal block element into three
    /// unipotent factors and a block-diagonal one.
    FactorIso {
        #[arg(long)]
        group: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        g: String,
    },
    /// Extend the restriction of an isometry to the orthogonal complement
    /// of a small subspace, with a rank-defect bound.
    WittExtend {
        #[arg(long)]
        field: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        gram: String,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        g: String,
    },
    /// Build a dyadic path between two elements and report its deviation
    /// from additivity.
    Geodesic {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Run a seeded verification suite and report violation counts.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run one job per line from a file, emitting records in input order.
    Batch {
        #[arg(long)]
        file: String,
    },
}

#[derive(Debug)]
struct Failure {
    code: String,
    malformed: bool,
    detail: Option<String>,
}

impl From<text::ParseError> for Failure {
    fn from(e: text::ParseError) -> Failure {
        Failure {
            code: "ParseError".into(),
            malformed: true,
            detail: Some(e.0),
        }
    }
}

impl From<bimetric_core::Error> for Failure {
    fn from(e: bimetric_core::Error) -> Failure {
        Failure {
            code: e.code().into(),
            malformed: false,
            detail: None,
        }
    }
}

fn parse_failure(detail: &str) -> Failure {
    Failure {
        code: "ParseError".into(),
        malformed: true,
        detail: Some(detail.into()),
    }
}

fn tag_name(tag: FactorTag) -> &'static str {
    match tag {
        FactorTag::U => "U",
        FactorTag::UT => "UT",
        FactorTag::V => "V",
        FactorTag::VT => "VT",
        FactorTag::H => "H",
        FactorTag::E => "E",
        FactorTag::Y => "Y",
    }
}

fn format_factor(fac: &SubgroupFactor) -> String {
    let payload = match fac.payload() {
        FactorPayload::Matrix(m) => text::format_matrix(m),
        FactorPayload::Lambda { field, lambda, n } => {
            format!("{}@{}", text::format_element(field, *lambda), n)
        }
    };
    format!("{}:{}", tag_name(fac.tag()), payload)
}

fn cmd_split_perm(n: usize, g: &str, t: &str) -> Result<Vec<String>, Failure> {
    let g = text::parse_permutation(n, g)?;
    let t = text::parse_rational(t)?;
    let (h, k) = split_even(&g, t)?;
    let mu_g = Rational::from_integer(support_count(&g) as i64);
    let mu_h = Rational::from_integer(support_count(&h) as i64);
    let mu_k = Rational::from_integer(support_count(&k) as i64);
    let slack_h = (mu_h - t * mu_g).abs();
    let slack_k = (mu_k - (Rational::one() - t) * mu_g).abs();
    Ok(vec![
        format!("h={}", text::format_permutation(&h)),
        format!("k={}", text::format_permutation(&k)),
        format!("slack_h={}", text::format_rational(&slack_h)),
        format!("slack_k={}", text::format_rational(&slack_k)),
    ])
}

fn cmd_split_sl(field: &str, g: &str, lambda: &str, phi: &str) -> Result<Vec<String>, Failure> {
    let f = text::parse_field(field)?;
    let g = text::parse_matrix(&f, g)?;
    let lambda = text::parse_element(&f, lambda)?;
    let phi1 = text::parse_rational(phi)?;
    let (h, k) = split_sl(&g, lambda, phi1)?;
    let r = Rational::from_integer(g.sub_scalar(lambda).rank() as i64);
    let slack_h = (Rational::from_integer(h.sub_scalar(lambda).rank() as i64) - phi1).abs();
    let slack_k = (Rational::from_integer(k.sub_scalar(f.one()).rank() as i64) - (r - phi1)).abs();
    Ok(vec![
        format!("h={}", text::format_matrix(&h)),
        format!("k={}", text::format_matrix(&k)),
        format!("slack_h={}", text::format_rational(&slack_h)),
        format!("slack_k={}", text::format_rational(&slack_k)),
    ])
}

fn cmd_normalize_e(field: &str, a: &str) -> Result<Vec<String>, Failure> {
    let f = text::parse_field(field)?;
    let a = text::parse_matrix(&f, a)?;
    let (m, x) = normalize_by_e(&a)?;
    Ok(vec![
        format!("lambda={}", text::format_element(&f, m.lambda)),
        format!("m={}", text::format_matrix(&m.matrix())),
        format!("x={}", text::format_matrix(&x)),
    ])
}

fn cmd_factor_sp(field: &str, g: &str) -> Result<Vec<String>, Failure> {
    let f = text::parse_field(field)?;
    let m = text::parse_matrix(&f, g)?;
    let g = BlockElement::from_matrix(GroupTag::Sp, &m)?;
    let (u1, u2, u3, h) = factor_symplectic(&g)?;
    Ok(vec![
        format!("u1={}", format_factor(&u1)),
        format!("u2={}", format_factor(&u2)),
        format!("u3={}", format_factor(&u3)),
        format!("h={}", format_factor(&h)),
    ])
}

fn cmd_factor_iso(group: &str, field: &str, g: &str) -> Result<Vec<String>, Failure> {
    let tag = match group {
        "su" => GroupTag::SU,
        "omega" => GroupTag::OmegaPlusShape,
        _ => return Err(parse_failure("group must be su or omega")),
    };
    let f = text::parse_field(field)?;
    let m = text::parse_matrix(&f, g)?;
    let g = BlockElement::from_matrix(tag, &m)?;
    let (v1, v2, v3, h) = factor_isometry_block(&g)?;
    Ok(vec![
        format!("v1={}", format_factor(&v1)),
        format!("v2={}", format_factor(&v2)),
        format!("v3={}", format_factor(&v3)),
        format!("h={}", format_factor(&h)),
    ])
}

fn cmd_witt_extend(
    field: &str,
    kind: &str,
    gram: &str,
    s: usize,
    g: &str,
) -> Result<Vec<String>, Failure> {
    let f = text::parse_field(field)?;
    let kind = match kind {
        "quadratic" => FormKind::Quadratic,
        "hermitian" => FormKind::Hermitian,
        _ => return Err(parse_failure("kind must be quadratic or hermitian")),
    };
    let gram = text::parse_matrix(&f, gram)?;
    let g = text::parse_matrix(&f, g)?;
    let space = FormSpace::new(kind, gram)?;
    let n = space.dim();
    if s > n {
        return Err(parse_failure("s exceeds the space dimension"));
    }
    let l = n - s;
    let h = witt_extend(&space, s, &g)?;
    let defect = Matrix::from_fn(&f, l, n, |i, j| {
        if j < l {
            f.sub(g.get(i, j), h.get(i, j))
        } else {
            g.get(i, j)
        }
    });
    Ok(vec![
        format!("h={}", text::format_matrix(&h)),
        format!("defect={}", defect.rank()),
        format!("bound={}", 3 * s),
    ])
}

fn cmd_geodesic(
    kind: &str,
    n: usize,
    field: Option<&str>,
    depth: usize,
    x: &str,
    y: &str,
) -> Result<Vec<String>, Failure> {
    let (dk, needs_field) = match kind {
        "hamming" => (DistanceKind::Hamming, false),
        "rank" => (DistanceKind::Rank, true),
        "projective-rank" | "projective" => (DistanceKind::ProjectiveRank, true),
        _ => return Err(parse_failure("kind must be hamming, rank, or projective-rank")),
    };
    let ctx = MetricGroupContext::new(dk, n)?;
    let (px, py) = if needs_field {
        let f = text::parse_field(field.ok_or_else(|| parse_failure("matrix kinds need --field"))?)?;
        (
            PathElement::Mat(text::parse_matrix(&f, x)?),
            PathElement::Mat(text::parse_matrix(&f, y)?),
        )
    } else {
        (
            PathElement::Perm(text::parse_permutation(n, x)?),
            PathElement::Perm(text::parse_permutation(n, y)?),
        )
    };
    let path = dyadic_path(&ctx, &px, &py, depth)?;
    let ell = ctx.distance(&px, &py)?;
    let dev = path_deviation(&ctx, &path)?;
    let budget = Rational::from_integer(2 * depth as i64) * ctx.epsilon();
    if dev > budget {
        return Err(bimetric_core::Error::BoundViolation.into());
    }
    let mut lines = Vec::with_capacity(path.len() + 3);
    for i in 0..path.len() {
        let lam = path.lambda(i);
        let point = match path.point(i) {
            PathElement::Perm(p) => text::format_permutation(p),
            PathElement::Mat(m) => text::format_matrix(m),
        };
        lines.push(format!("lambda={} point={}", text::format_rational(&lam), point));
    }
    lines.push(format!("ell={}", text::format_rational(&ell)));
    lines.push(format!("deviation={}", text::format_rational(&dev)));
    lines.push(format!("budget={}", text::format_rational(&budget)));
    Ok(lines)
}

fn cmd_verify(suite: &str, trials: u64, seed: u64) -> Result<Vec<String>, Failure> {
    let (lines, bad) = verify::run_suite(suite, trials, seed)
        .ok_or_else(|| parse_failure("unknown suite"))?;
    if bad > 0 {
        for line in &lines {
            println!("{line}");
        }
        return Err(bimetric_core::Error::BoundViolation.into());
    }
    Ok(lines)
}

fn run_cmd(cmd: &Cmd) -> Result<Vec<String>, Failure> {
    match cmd {
        Cmd::SplitPerm { n, g, t } => cmd_split_perm(*n, g, t),
        Cmd::SplitSl { field, g, lambda, phi } => cmd_split_sl(field, g, lambda, phi),
        Cmd::NormalizeE { field, a } => cmd_normalize_e(field, a),
        Cmd::FactorSp { field, g } => cmd_factor_sp(field, g),
        Cmd::FactorIso { group, field, g } => cmd_factor_iso(group, field, g),
        Cmd::WittExtend { field, kind, gram, s, g } => cmd_witt_extend(field, kind, gram, *s, g),
        Cmd::Geodesic { kind, n, field, depth, x, y } => {
            cmd_geodesic(kind, *n, field.as_deref(), *depth, x, y)
        }
        Cmd::Verify { suite, trials, seed } => cmd_verify(suite, *trials, *seed),
        Cmd::Batch { .. } => Err(parse_failure("batch cannot nest")),
    }
}

/// Prints a command's records and its summary, returning the exit status.
fn emit(outcome: Result<Vec<String>, Failure>) -> u8 {
    match outcome {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            println!("ok=true");
            0
        }
        Err(f) => {
            if let Some(d) = &f.detail {
                eprintln!("{d}");
            }
            println!("error={}", f.code);
            println!("ok=false");
            if f.malformed {
                2
            } else {
                1
            }
        }
    }
}

fn tokenize(line: &str) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut pending = false;
    for c in line.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                pending = true;
            }
            c if c.is_whitespace() && !quoted => {
                if pending {
                    out.push(core::mem::take(&mut cur));
                    pending = false;
                }
            }
            c => {
                cur.push(c);
                pending = true;
            }
        }
    }
    if quoted {
        return None;
    }
    if pending {
        out.push(cur);
    }
    Some(out)
}

fn run_batch(file: &str) -> ExitCode {
    let contents = match std::fs::read_to_string(file) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            println!("error=IoError");
            println!("ok=false");
            return ExitCode::from(2);
        }
    };
    let mut worst = 0u8;
    let mut job = 0usize;
    for line in contents.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        println!("job={job}");
        job += 1;
        let outcome = match tokenize(trimmed) {
            None => Err(parse_failure("unbalanced quote")),
            Some(tokens) => {
                let argv = std::iter::once("bimetric".to_string()).chain(tokens);
                match Cli::try_parse_from(argv) {
                    Err(e) => Err(parse_failure(&e.to_string())),
                    Ok(cli) => run_cmd(&cli.cmd),
                }
            }
        };
        let status = emit(outcome);
        worst = worst.max(status);
    }
    ExitCode::from(worst)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            println!("error=ParseError");
            println!("ok=false");
            return ExitCode::from(2);
        }
    };
    match &cli.cmd {
        Cmd::Batch { file } => run_batch(file),
        other => ExitCode::from(emit(run_cmd(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_handles_quotes() {
        let toks = tokenize(r#"split-perm --n 6 --g "(1 2 3)(4 5 6)" --t 1/2"#).unwrap();
        assert_eq!(
            toks,
            vec!["split-perm", "--n", "6", "--g", "(1 2 3)(4 5 6)", "--t", "1/2"]
        );
        assert!(tokenize(r#"--g "unclosed"#).is_none());
        assert_eq!(tokenize("  "), Some(vec![]));
    }

    #[test]
    fn split_perm_records() {
        let lines = cmd_split_perm(6, "(1 2 3)(4 5 6)", "1/2").unwrap();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("h="));
        assert!(lines[1].starts_with("k="));
    }

    #[test]
    fn error_classification() {
        let odd = cmd_split_perm(4, "(1 2)", "1/2").unwrap_err();
        assert!(!odd.malformed);
        assert_eq!(odd.code, "ParityError");
        let bad = cmd_split_perm(4, "nonsense", "1/2").unwrap_err();
        assert!(bad.malformed);
    }

    #[test]
    fn factor_sp_identity() {
        let lines = cmd_factor_sp("3", "1,0;0,1").unwrap();
        assert_eq!(lines[0], "u1=UT:0");
        assert_eq!(lines[3], "h=H:1");
    }
}
