use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use shiftstab::hardpair::{
    check_membership, GammaTailClass, HypothesisCheck, LdHardPair, LdHypotheses, MdHardPair, Member, MembershipReport,
};
use shiftstab::Error;

use crate::exit;
use crate::output::{json_bytes, Sink};

/// Absolute slack on inequalities whose two sides agree up to quadrature
/// roundoff.
const SLACK: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-8;
const KL_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ld,
    Md,
}

#[derive(Debug, Args, Serialize)]
pub struct HardpairArgs {
    pub kind: Kind,
    /// JSON object with any of `sigma`, `y`, `gamma`, `x0`, `omega`; flags
    /// override its fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Splice point; the large-deviations pair defaults to the smallest
    /// admissible value.
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub sigma: Option<f64>,
    pub y: Option<f64>,
    pub gamma: Option<f64>,
    pub x0: Option<f64>,
    pub omega: Option<f64>,
}

impl Params {
    fn resolve(a: &HardpairArgs) -> Result<Self> {
        let file = match &a.params {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => Params::default(),
        };
        Ok(Params {
            sigma: a.sigma.or(file.sigma),
            y: a.y.or(file.y),
            gamma: a.gamma.or(file.gamma),
            x0: a.x0.or(file.x0),
            omega: a.omega.or(file.omega),
        })
    }
}

fn require(v: Option<f64>, name: &str) -> Result<f64> {
    match v {
        Some(v) => Ok(v),
        None => bail!("missing parameter '{name}'"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    NotAsserted,
}

/// One checked inequality `lhs ≤ rhs` (or `≥`), with `margin` positive when
/// it holds.
#[derive(Debug, Serialize)]
struct Inequality {
    name: &'static str,
    lhs: f64,
    relation: &'static str,
    rhs: f64,
    margin: f64,
    status: Status,
}

impl Inequality {
    fn le(name: &'static str, lhs: f64, rhs: f64, asserted: bool) -> Self {
        Self::build(name, lhs, "<=", rhs, rhs - lhs, asserted)
    }

    fn ge(name: &'static str, lhs: f64, rhs: f64, asserted: bool) -> Self {
        Self::build(name, lhs, ">=", rhs, lhs - rhs, asserted)
    }

    fn build(name: &'static str, lhs: f64, relation: &'static str, rhs: f64, margin: f64, asserted: bool) -> Self {
        let status = match (asserted, margin >= -SLACK) {
            (false, _) => Status::NotAsserted,
            (true, true) => Status::Pass,
            (true, false) => Status::Fail,
        };
        Inequality { name, lhs, relation, rhs, margin, status }
    }
}

#[derive(Debug, Serialize)]
struct MemberCheck {
    member: Member,
    is_member: bool,
    status: Status,
    report: MembershipReport,
}

fn member_check(member: Member, report: MembershipReport, asserted: bool) -> MemberCheck {
    let is_member = report.is_member();
    let status = match (asserted, is_member) {
        (false, _) => Status::NotAsserted,
        (true, true) => Status::Pass,
        (true, false) => Status::Fail,
    };
    MemberCheck { member, is_member, status, report }
}

fn all_pass(inequalities: &[Inequality], members: &[MemberCheck]) -> bool {
    inequalities.iter().all(|i| i.status != Status::Fail) && members.iter().all(|m| m.status != Status::Fail)
}

pub fn run(a: HardpairArgs, sink: &mut Sink) -> Result<u8> {
    let params = Params::resolve(&a)?;
    sink.parameter("params", params);
    match a.kind {
        Kind::Ld => ld(params, sink),
        Kind::Md => md(params, sink),
    }
}

#[derive(Debug, Serialize)]
struct Construction {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violated: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_bracket: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    splice_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct LdReport {
    kind: Kind,
    sigma: f64,
    y: f64,
    gamma: f64,
    x0: f64,
    x0_source: &'static str,
    hypotheses: Vec<HypothesisCheck>,
    hypotheses_satisfied: bool,
    construction: Construction,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    inequalities: Vec<Inequality>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    membership: Vec<MemberCheck>,
    all_pass: bool,
}

fn ld(p: Params, sink: &mut Sink) -> Result<u8> {
    let (sigma, y, gamma) = (require(p.sigma, "sigma")?, require(p.y, "y")?, require(p.gamma, "gamma")?);
    let class = GammaTailClass::new(sigma, y, gamma)?;
    let hypotheses = LdHypotheses::for_class(&class);
    let (x0, x0_source) = match p.x0 {
        Some(x0) => (x0, "given"),
        None => match hypotheses.smallest_admissible_x0() {
            Some(x0) => (x0, "fixed_point"),
            None => bail!("the splice-point fixed-point iteration did not converge"),
        },
    };
    let checks = hypotheses.checks(x0);
    let satisfied = checks.iter().all(|c| c.satisfied);
    let mut report = LdReport {
        kind: Kind::Ld,
        sigma,
        y,
        gamma,
        x0,
        x0_source,
        hypotheses: checks,
        hypotheses_satisfied: satisfied,
        construction: Construction {
            feasible: false,
            violated: None,
            eta: None,
            c: None,
            c_bracket: None,
            splice_ratio: None,
        },
        inequalities: Vec::new(),
        membership: Vec::new(),
        all_pass: false,
    };
    let pair = match LdHardPair::new(class, x0) {
        Ok(pair) => pair,
        Err(Error::Infeasible(msg)) => {
            report.construction.violated = Some(msg.clone());
            sink.report("hardpair.json", &json_bytes(&report))?;
            let failed: Vec<&str> =
                report.hypotheses.iter().filter(|c| !c.satisfied).map(|c| c.name.as_str()).collect();
            eprintln!("error: construction infeasible: {msg}");
            if !failed.is_empty() {
                eprintln!("hypotheses violated: {}", failed.join(", "));
            }
            return Ok(exit::INFEASIBLE_CONSTRUCTION);
        }
        Err(e) => return Err(e.into()),
    };
    let (lo, hi) = pair.c_bracket();
    report.construction = Construction {
        feasible: true,
        violated: None,
        eta: Some(pair.eta()),
        c: Some(pair.norm_c()),
        c_bracket: Some((lo, hi)),
        splice_ratio: Some(pair.splice_ratio()),
    };

    let (m1, m2) = pair.normalization()?;
    let kl = pair.kl_divergence()?.value;
    let kl_bound = (-sigma * x0).exp();
    let separation = pair.numeric_separation()?;
    let separation_bound = pair.separation_bound().ok();
    let eta = pair.eta();
    let mut ineq = vec![
        Inequality::ge("eta lower", eta, 0.5 * (1.0 - gamma), satisfied),
        Inequality::le("eta upper", eta, 1.0 - gamma, true),
        Inequality::ge("c bracket lower", pair.norm_c(), lo, satisfied),
        Inequality::le("c bracket upper", pair.norm_c(), hi, satisfied),
        Inequality::le("normalization first", (m1 - 1.0).abs(), NORMALIZATION_TOL, true),
        Inequality::le("normalization second", (m2 - 1.0).abs(), NORMALIZATION_TOL, true),
        Inequality::le("kl", kl, kl_bound, satisfied),
    ];
    if let Some(bound) = separation_bound {
        ineq.push(Inequality::ge("separation", separation, bound, satisfied));
    }
    let members = vec![
        member_check(Member::First, check_membership(&pair.member(Member::First), &class)?, satisfied),
        member_check(Member::Second, check_membership(&pair.member(Member::Second), &class)?, satisfied),
    ];
    report.all_pass = satisfied && all_pass(&ineq, &members);
    report.inequalities = ineq;
    report.membership = members;
    sink.report("hardpair.json", &json_bytes(&report))?;
    Ok(exit::OK)
}

#[derive(Debug, Serialize)]
struct MdReport {
    kind: Kind,
    sigma: f64,
    omega: f64,
    x0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    kl_closed_form: f64,
    kl_quadrature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    class_hypothesis: Option<bool>,
    inequalities: Vec<Inequality>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    membership: Vec<MemberCheck>,
    all_pass: bool,
}

fn md(p: Params, sink: &mut Sink) -> Result<u8> {
    let (sigma, omega, x0) = (require(p.sigma, "sigma")?, require(p.omega, "omega")?, require(p.x0, "x0")?);
    let pair = MdHardPair::new(sigma, omega, x0)?;
    let kl = pair.kl_divergence();
    let kl_quad = pair.kl_divergence_quadrature()?.value;
    let mut ineq = vec![
        Inequality::le("kl agreement", (kl - kl_quad).abs(), KL_AGREEMENT_TOL * kl.max(1.0), true),
        Inequality::le("kl", kl, 0.5 * omega * omega, true),
        Inequality::le("normalization second", (pair.second_mass() - 1.0).abs(), NORMALIZATION_TOL, true),
    ];
    if let Some(y) = p.y {
        if let Ok(bound) = pair.separation_bound(y) {
            ineq.push(Inequality::ge("separation", pair.numeric_separation(y)?, bound, true));
        }
    }
    let class = match (p.y, p.gamma) {
        (Some(y), Some(g)) => Some(GammaTailClass::new(sigma, y, g)?),
        (None, Some(_)) => bail!("membership checks need 'y' as well as 'gamma'"),
        _ => None,
    };
    let class_hypothesis = class.as_ref().map(|c| pair.satisfies_class_hypothesis(c));
    let members = match &class {
        Some(c) => {
            let asserted = class_hypothesis == Some(true);
            vec![
                member_check(Member::First, check_membership(&pair.member(Member::First), c)?, asserted),
                member_check(Member::Second, check_membership(&pair.member(Member::Second), c)?, asserted),
            ]
        }
        None => Vec::new(),
    };
    let report = MdReport {
        kind: Kind::Md,
        sigma,
        omega,
        x0,
        y: p.y,
        gamma: p.gamma,
        kl_closed_form: kl,
        kl_quadrature: kl_quad,
        class_hypothesis,
        all_pass: all_pass(&ineq, &members),
        inequalities: ineq,
        membership: members,
    };
    sink.report("hardpair.json", &json_bytes(&report))?;
    Ok(exit::OK)
}
