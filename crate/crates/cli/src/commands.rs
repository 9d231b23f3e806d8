use std::collections::BTreeMap;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

use mettagraph::atomspace::{Atomspace, AtomspaceError};
use mettagraph::engine::{evaluate_traced, TraceRecord};
use mettagraph::lang::encode::{
    decode_full, decoded_to_pts, decoded_to_term, encode_pdts, encode_pts, encode_stlc, encode_untyped,
    pointed_root, DecodeError, EncodeError, Encoding,
};
use mettagraph::lang::lambda::stlc_typecheck;
use mettagraph::lang::pdts::{pdts_full_eval, pdts_sample, pdts_typecheck, PdtsError};
use mettagraph::lang::pts::{pts_typecheck_with, PtsSpec, DEFAULT_CONVERSION_BUDGET};
use mettagraph::lts::{bisim_check, prob_bisim_check, BisimVerdict, ExplicitLts, LtsError};
use mettagraph::minisys::{Systems, STATE_COUNT};
use mettagraph::syntax::{parse_atoms, parse_program, print_atoms, LanguageError, ParseError, Program, Surface};

use crate::{InputArgs, Lang};

pub const EXIT_OK: u8 = 0;
/// Distinguished systems or an ill-typed term.
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
/// Input, parse and configuration errors.
pub const EXIT_ERROR: u8 = 3;

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

pub struct Settings {
    pub budget: usize,
    pub seed: u64,
    pub pts_spec: Option<PathBuf>,
    pub json: bool,
    pub emit_dot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid transition system: {0}")]
    Lts(#[from] LtsError),
    #[error("invalid atomspace: {0}")]
    Space(#[from] AtomspaceError),
}

pub fn error_json(e: &CliError) -> Value {
    json!({ "version": REPORT_VERSION, "error": e.to_string() })
}

pub struct Report {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

impl Report {
    fn new(code: u8, command: &str, text: String, mut json: Value) -> Self {
        json["version"] = json!(REPORT_VERSION);
        json["command"] = json!(command);
        json["exit_code"] = json!(code);
        Report { code, text, json }
    }

    pub fn print(&self, as_json: bool) {
        if as_json {
            println!("{}", serde_json::to_string_pretty(&self.json).expect("reports serialize"));
        } else {
            print!("{}", self.text);
        }
    }
}

fn read_path(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|source| CliError::Io {
            path: "stdin".into(),
            source,
        })?;
    Ok(s)
}

fn read_input(i: &InputArgs) -> Result<String, CliError> {
    match (&i.file, &i.text) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --file or input text, not both".into())),
        (Some(p), None) if p.as_os_str() == "-" => read_stdin(),
        (Some(p), None) => read_path(p),
        (None, Some(t)) => Ok(t.clone()),
        (None, None) => read_stdin(),
    }
}

fn load_spec(set: &Settings) -> Result<PtsSpec, CliError> {
    match &set.pts_spec {
        Some(p) => PtsSpec::parse(&read_path(p)?).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(PtsSpec::lambda_arrow()),
    }
}

fn is_probabilistic(s: &Surface) -> bool {
    match s {
        Surface::Random(..) | Surface::Sample(_) | Surface::Thunk(_) | Surface::Dist(_) => true,
        Surface::Union(..) | Surface::Inter(..) | Surface::Type => true,
        Surface::Name(_) => false,
        Surface::App(a, b) | Surface::Pi(_, a, b) | Surface::Arrow(a, b) => is_probabilistic(a) || is_probabilistic(b),
        Surface::Lam(_, t, b) => t.as_deref().is_some_and(is_probabilistic) || is_probabilistic(b),
    }
}

fn looks_like_atoms(text: &str) -> bool {
    parse_atoms(text).is_ok_and(|atoms| atoms.iter().any(|a| a.pointed))
}

fn resolve(set: &Settings, lang: Lang, text: &str) -> Result<Lang, CliError> {
    if lang != Lang::Auto {
        return Ok(lang);
    }
    if looks_like_atoms(text) {
        return Ok(Lang::Atoms);
    }
    let p = parse_program(text)?;
    Ok(if set.pts_spec.is_some() {
        Lang::Pts
    } else if is_probabilistic(&p.term) || p.decls.iter().any(|(_, t)| is_probabilistic(t)) {
        Lang::Pdts
    } else if p.decls.is_empty() {
        Lang::Untyped
    } else {
        Lang::Stlc
    })
}

fn lang_name(l: Lang) -> &'static str {
    match l {
        Lang::Auto => "auto",
        Lang::Stlc => "stlc",
        Lang::Untyped => "untyped",
        Lang::Pts => "pts",
        Lang::Pdts => "pdts",
        Lang::Atoms => "atoms",
    }
}

type Decoder = Box<dyn Fn(&Atomspace, &mut usize) -> Result<String, DecodeError>>;

/// The encoded space and a reader for its normal forms, or the type error
/// that prevented encoding.
fn build(set: &Settings, lang: Lang, text: &str) -> Result<Result<(Atomspace, Decoder), String>, CliError> {
    if lang == Lang::Atoms {
        let space = Atomspace::new().add_atoms(parse_atoms(text)?)?;
        let dec: Decoder = Box::new(|s: &Atomspace, _: &mut usize| {
            let root = pointed_root(s)?;
            Ok(s.atom(root).unmarked().to_string())
        });
        return Ok(Ok((space, dec)));
    }
    let p: Program = parse_program(text)?;
    let typed = lang != Lang::Untyped;
    let from_encoding = |r: Result<Encoding, EncodeError>, read: fn(&mettagraph::lang::encode::Decoded, &PtsSpec, bool) -> Result<String, DecodeError>, spec: PtsSpec| -> Result<Result<(Atomspace, Decoder), String>, CliError> {
        match r {
            Ok(enc) => {
                let combs = enc.combinators;
                let dec: Decoder = Box::new(move |s: &Atomspace, budget: &mut usize| {
                    let d = decode_full(s, &combs, budget)?;
                    read(&d, &spec, typed)
                });
                Ok(Ok((enc.space, dec)))
            }
            Err(EncodeError::Space(e)) => Err(CliError::Space(e)),
            Err(e) => Ok(Err(e.to_string())),
        }
    };
    let as_term = |d: &mettagraph::lang::encode::Decoded, _: &PtsSpec, typed: bool| decoded_to_term(d, typed).map(|t| t.to_string());
    let as_pts = |d: &mettagraph::lang::encode::Decoded, spec: &PtsSpec, _: bool| decoded_to_pts(d, spec).map(|t| t.to_string());
    match lang {
        Lang::Stlc => from_encoding(encode_stlc(&p.stlc_context()?, &p.term.to_term()?), as_term, PtsSpec::lambda_arrow()),
        Lang::Untyped => from_encoding(encode_untyped(&p.term.to_term()?), as_term, PtsSpec::lambda_arrow()),
        Lang::Pts => {
            let spec = load_spec(set)?;
            let r = encode_pts(&spec, &p.pts_context(&spec)?, &p.term.to_pts(&spec)?);
            from_encoding(r, as_pts, spec)
        }
        Lang::Pdts => match encode_pdts(&p.pdts_context()?, &p.term.to_pdts()?) {
            Ok(enc) => {
                let space = enc.encoding.space.clone();
                let dec: Decoder = Box::new(move |s: &Atomspace, _: &mut usize| enc.decode(s).map(|e| e.to_string()));
                Ok(Ok((space, dec)))
            }
            Err(EncodeError::Space(e)) => Err(CliError::Space(e)),
            Err(e) => Ok(Err(e.to_string())),
        },
        Lang::Auto | Lang::Atoms => unreachable!("resolved above"),
    }
}

fn rejected(command: &str, lang: Lang, msg: String) -> Report {
    Report::new(
        EXIT_REJECTED,
        command,
        format!("type error: {msg}\n"),
        json!({ "lang": lang_name(lang), "type_error": msg }),
    )
}

pub fn eval(set: &Settings, input: &InputArgs, lang: Lang, trace: bool) -> Result<Report, CliError> {
    let text = read_input(input)?;
    let lang = resolve(set, lang, &text)?;
    let (space, decode) = match build(set, lang, &text)? {
        Ok(x) => x,
        Err(msg) => return Ok(rejected("eval", lang, msg)),
    };
    let ev = evaluate_traced(&space, set.budget, |r: &TraceRecord| {
        if trace {
            eprintln!("{}", serde_json::to_string(r).expect("trace records serialize"));
        }
    });
    let mut exhausted = ev.outcome.is_exhausted();
    let mut rest = set.budget.saturating_sub(ev.steps);
    let mut forms = Vec::new();
    for nf in ev.outcome.normal_forms() {
        let atom = pointed_root(nf).map(|r| nf.atom(r).unmarked().to_string()).unwrap_or_default();
        let term = match decode(nf, &mut rest) {
            Ok(t) => t,
            Err(DecodeError::Budget(_)) => {
                exhausted = true;
                atom.clone()
            }
            Err(_) => atom.clone(),
        };
        forms.push((term, atom));
    }
    let mut out = format!("steps: {}\n", ev.steps);
    for (t, _) in &forms {
        out += &format!("normal form: {t}\n");
    }
    if exhausted {
        out += &format!("budget of {} steps exhausted\n", set.budget);
    }
    let code = if exhausted { EXIT_BUDGET } else { EXIT_OK };
    Ok(Report::new(
        code,
        "eval",
        out,
        json!({
            "lang": lang_name(lang),
            "input": text.trim(),
            "steps": ev.steps,
            "budget": set.budget,
            "exhausted": exhausted,
            "normal_forms": forms.iter().map(|(t, a)| json!({ "term": t, "atom": a })).collect::<Vec<_>>(),
        }),
    ))
}

fn pdts_input(input: &InputArgs) -> Result<(String, mettagraph::lang::pdts::PdtsExpr), CliError> {
    let text = read_input(input)?;
    let p = parse_program(&text)?;
    let e = p.term.to_pdts()?;
    Ok((text, e))
}

fn probability(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').map(|t| format!("{t}.0")).unwrap_or_else(|| s.to_string())
}

pub fn full_eval(set: &Settings, input: &InputArgs) -> Result<Report, CliError> {
    let (text, e) = pdts_input(input)?;
    let (dist, residual, code) = match pdts_full_eval(&e, set.budget) {
        Ok(d) => (d, 0.0, EXIT_OK),
        Err(x) => (x.partial, x.residual, EXIT_BUDGET),
    };
    let mut rows: Vec<(String, f64)> = dist.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: String = rows.iter().map(|(k, v)| format!("{k}: {}\n", probability(*v))).collect();
    if code == EXIT_BUDGET {
        out += &format!("budget of {} steps exhausted; unresolved mass {}\n", set.budget, probability(residual));
    }
    let map: serde_json::Map<String, Value> = rows.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    Ok(Report::new(
        code,
        "full-eval",
        out,
        json!({
            "input": text.trim(),
            "distribution": map,
            "mass": rows.iter().map(|r| r.1).sum::<f64>(),
            "residual": residual,
            "exhausted": code == EXIT_BUDGET,
        }),
    ))
}

pub fn sample(set: &Settings, input: &InputArgs, runs: u64) -> Result<Report, CliError> {
    let (text, e) = pdts_input(input)?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut failures = 0u64;
    for k in 0..runs {
        match pdts_sample(&e, set.seed.wrapping_add(k), set.budget) {
            Ok(nf) => *counts.entry(nf.to_string()).or_insert(0) += 1,
            Err(PdtsError::Budget { .. }) => failures += 1,
            Err(other) => return Err(CliError::Config(other.to_string())),
        }
    }
    let code = if failures > 0 { EXIT_BUDGET } else { EXIT_OK };
    let mut out = if runs == 1 {
        counts.keys().map(|k| format!("{k}\n")).collect()
    } else {
        counts.iter().map(|(k, n)| format!("{k}: {n}\n")).collect::<String>()
    };
    if failures > 0 {
        out += &format!("{failures} run(s) exhausted the budget of {} steps\n", set.budget);
    }
    Ok(Report::new(
        code,
        "sample",
        out,
        json!({
            "input": text.trim(),
            "seed": set.seed,
            "runs": runs,
            "counts": counts,
            "exhausted": failures,
        }),
    ))
}

pub fn typecheck(set: &Settings, input: &InputArgs, lang: Lang) -> Result<Report, CliError> {
    let text = read_input(input)?;
    let lang = resolve(set, lang, &text)?;
    let p = parse_program(&text)?;
    let result: Result<String, String> = match lang {
        Lang::Stlc | Lang::Untyped => stlc_typecheck(&p.stlc_context()?, &p.term.to_term()?)
            .map(|t| t.to_string())
            .map_err(|e| e.to_string()),
        Lang::Pts => {
            let spec = load_spec(set)?;
            let budget = set.budget.max(DEFAULT_CONVERSION_BUDGET);
            let r = pts_typecheck_with(&spec, &p.pts_context(&spec)?, &p.term.to_pts(&spec)?, budget);
            if let Err(e @ mettagraph::lang::pts::PtsError::ConversionBudget(_)) = &r {
                let msg = e.to_string();
                return Ok(Report::new(
                    EXIT_BUDGET,
                    "typecheck",
                    format!("{msg}\n"),
                    json!({ "lang": "pts", "exhausted": true, "type_error": msg }),
                ));
            }
            r.map(|t| t.to_string()).map_err(|e| e.to_string())
        }
        Lang::Pdts => pdts_typecheck(&p.pdts_context()?, &p.term.to_pdts()?)
            .map(|t| t.to_string())
            .map_err(|e| e.to_string()),
        Lang::Atoms => return Err(CliError::Config("atoms are not typechecked; use eval".into())),
        Lang::Auto => unreachable!("resolved above"),
    };
    Ok(match result {
        Ok(t) => Report::new(
            EXIT_OK,
            "typecheck",
            format!("{t}\n"),
            json!({ "lang": lang_name(lang), "type": t }),
        ),
        Err(msg) => rejected("typecheck", lang, msg),
    })
}

pub fn encode(set: &Settings, input: &InputArgs, lang: Lang) -> Result<Report, CliError> {
    let text = read_input(input)?;
    let lang = resolve(set, lang, &text)?;
    let (space, _) = match build(set, lang, &text)? {
        Ok(x) => x,
        Err(msg) => return Ok(rejected("encode", lang, msg)),
    };
    let atoms = space.root_atoms();
    Ok(Report::new(
        EXIT_OK,
        "encode",
        print_atoms(&atoms),
        json!({
            "lang": lang_name(lang),
            "atoms": atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "hash": space.hash_hex(),
        }),
    ))
}

fn write_dot(dir: &Path, name: &str, dot: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, dot).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn verdict_json<S1: std::fmt::Debug, S2: std::fmt::Debug>(v: &BisimVerdict<S1, S2>) -> (u8, String, Value) {
    match v {
        BisimVerdict::Bisimilar { relation } => (
            EXIT_OK,
            format!("Bisimilar\nrelation size: {}\n", relation.len()),
            json!({ "verdict": "Bisimilar", "relation_size": relation.len() }),
        ),
        BisimVerdict::Distinguished { witness } => (
            EXIT_REJECTED,
            format!("Distinguished\nwitness: {witness}\ndepth: {}\n", witness.depth()),
            json!({
                "verdict": "Distinguished",
                "witness": witness.to_string(),
                "depth": witness.depth(),
                "trace": witness.trace(),
            }),
        ),
        BisimVerdict::Inconclusive { reason } => (
            EXIT_BUDGET,
            format!("Inconclusive: {reason}\n"),
            json!({ "verdict": "Inconclusive", "reason": reason }),
        ),
    }
}

pub fn bisim(
    set: &Settings,
    first: &Path,
    second: &Path,
    start1: Option<&str>,
    start2: Option<&str>,
    tol: Option<f64>,
) -> Result<Report, CliError> {
    let l1 = ExplicitLts::from_json(&read_path(first)?)?;
    let l2 = ExplicitLts::from_json(&read_path(second)?)?;
    let start = |l: &ExplicitLts, s: Option<&str>| -> Result<String, CliError> {
        match s {
            Some(s) if l.states.iter().any(|x| x == s) => Ok(s.to_string()),
            Some(s) => Err(CliError::Lts(LtsError::UnknownState(s.to_string()))),
            None => l
                .states
                .first()
                .cloned()
                .ok_or_else(|| CliError::Config("a system has no states".into())),
        }
    };
    let (s1, s2) = (start(&l1, start1)?, start(&l2, start2)?);
    let v = match tol {
        Some(tol) => prob_bisim_check(&l1, &s1, &l2, &s2, set.budget, tol)?,
        None => bisim_check(&l1, &s1, &l2, &s2, set.budget),
    };
    let (code, mut out, mut js) = verdict_json(&v);
    if let Some(dir) = &set.emit_dot {
        let a = write_dot(dir, "first.dot", &l1.to_dot())?;
        let b = write_dot(dir, "second.dot", &l2.to_dot())?;
        out += &format!("wrote {} and {}\n", a.display(), b.display());
    }
    js["start"] = json!([s1, s2]);
    Ok(Report::new(code, "bisim", out, js))
}

pub fn minisys(set: &Settings, mutate: bool) -> Result<Report, CliError> {
    let t0 = Instant::now();
    let systems = Systems::new(mutate);
    let v = systems.check();
    let verified = match &v {
        BisimVerdict::Bisimilar { relation } => Some(systems.verify(relation)),
        _ => None,
    };
    let elapsed = t0.elapsed().as_secs_f64();
    let (mut code, verdict_text, mut js) = verdict_json(&v);
    let mut out = format!("terms: {} (expected {STATE_COUNT})\n", systems.terms.len());
    out += &verdict_text;
    if let Some(r) = &verified {
        match r {
            Ok(()) => out += "transfer conditions: verified for every pair\n",
            Err(e) => {
                out += &format!("transfer conditions: FAILED: {e}\n");
                code = EXIT_REJECTED;
            }
        }
    }
    out += &format!("time: {elapsed:.3}s\n");
    if let Some(dir) = &set.emit_dot {
        let (d2, d1) = systems.to_dot();
        let a = write_dot(dir, "str1.dot", &d1)?;
        let b = write_dot(dir, "str2.dot", &d2)?;
        out += &format!("wrote {} and {}\n", a.display(), b.display());
    }
    js["terms"] = json!(systems.terms.iter().map(|e| e.to_string()).collect::<Vec<_>>());
    js["mutated"] = json!(mutate);
    js["verified"] = json!(verified.as_ref().map(|r| r.is_ok()));
    js["seconds"] = json!(elapsed);
    Ok(Report::new(code, "demo minisys", out, js))
}
