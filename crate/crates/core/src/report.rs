//! Classification sweep over families and ranks, per-flag records and the
//! versioned JSON report, plus the replay check used by `verify`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chevalley::{generate_constants_with, ChevError, SignConvention, StructureConstants};
use crate::exactalg::QMatrix;
use crate::invariants::{
    acs_exists, decompose, moduli_dimension, param_family, span_labels, verify_acs, verify_obstruction,
    AcsVerdict, DerivationStep, EndoType, InvError, Obstruction,
};
use crate::isotropy::{build_isotropy, default_model, m_parity_filter, FlagSpec, IsoError, IsotropyModel, Model};
use crate::nijenhuis::{
    first_nonzero, integrability_verdict, BranchSummary, IntegrabilityOptions, IntegrabilityStatus,
};
use crate::rootsys::{build_root_system, theta_closure, Family, LieType, RootError, RootSystem};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest rank accepted for a sweep.
pub const MAX_SWEEP_RANK: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Chevalley(#[from] ChevError),
    #[error(transparent)]
    Isotropy(#[from] IsoError),
    #[error(transparent)]
    Invariants(#[from] InvError),
    #[error("rank {0} exceeds the sweep limit of {MAX_SWEEP_RANK}")]
    RankGuard(usize),
    #[error("bad family range '{0}' (expected e.g. A:1-5 or G:2)")]
    BadRange(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("malformed matrix in report: {0}")]
    Matrix(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelPref {
    /// m_theta for intermediate C/D flags, n_minus otherwise
    Default,
    NMinus,
    MTheta,
    Both,
}

impl ModelPref {
    fn models(self, t: LieType, members: &[usize], rs: &RootSystem) -> Vec<Model> {
        match self {
            ModelPref::Default => vec![default_model(t, &theta_closure(rs, members))],
            ModelPref::NMinus => vec![Model::NMinus],
            ModelPref::MTheta => vec![Model::MTheta],
            ModelPref::Both => vec![Model::NMinus, Model::MTheta],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub families: Vec<(Family, usize, usize)>,
    pub model: ModelPref,
    pub samples: usize,
    pub seed: u64,
    /// run the Nijenhuis stage on flags that admit a structure
    pub integrability: bool,
    /// flip the sign of one extraspecial structure constant
    pub flip_sign: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            families: parse_families("A:1-5,B:2-4,C:2-6,D:4-6,G:2").unwrap(),
            model: ModelPref::Default,
            samples: 100,
            seed: 0,
            integrability: true,
            flip_sign: false,
        }
    }
}

/// `A:1-5,B:2-4,G:2` → family and inclusive rank range.
pub fn parse_families(text: &str) -> Result<Vec<(Family, usize, usize)>, ReportError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || ReportError::BadRange(part.to_string());
        let (f, r) = part.split_once(':').ok_or_else(bad)?;
        let family: Family = f.parse()?;
        let (lo, hi) = match r.split_once('-') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let k: usize = r.trim().parse().map_err(|_| bad())?;
                (k, k)
            }
        };
        if lo > hi {
            return Err(bad());
        }
        if hi > MAX_SWEEP_RANK {
            return Err(ReportError::RankGuard(hi));
        }
        for l in lo..=hi {
            LieType::new(family, l)?;
        }
        out.push((family, lo, hi));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub roots: Vec<String>,
    pub even: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionRecord {
    pub kind: String,
    pub dim: usize,
    pub span_labels: Vec<String>,
    pub derivation: Vec<DerivationStep>,
    /// columns of the odd subspace in module coordinates
    pub basis: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AcsRecord {
    Witness {
        zero_dimensional: bool,
        construction: Vec<String>,
        j: Vec<Vec<String>>,
    },
    Obstruction(ObstructionRecord),
    Inconclusive {
        reason: String,
    },
}

impl AcsRecord {
    pub fn name(&self) -> &'static str {
        match self {
            AcsRecord::Witness { .. } => "witness",
            AcsRecord::Obstruction(_) => "obstruction",
            AcsRecord::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub choices: Vec<String>,
    pub assignment: BTreeMap<String, String>,
    pub j: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrabilityRecord {
    pub model: Model,
    pub status: IntegrabilityStatus,
    pub parameters: Vec<String>,
    pub equations: usize,
    pub certificate: Vec<BranchSummary>,
    pub solutions: Vec<SolutionRecord>,
    pub samples: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagRecord {
    pub id: String,
    pub lie_type: LieType,
    pub theta: Vec<String>,
    pub model: Model,
    pub module_dim: usize,
    pub labels: Vec<String>,
    pub m_classes: Vec<ClassRecord>,
    pub all_even: bool,
    pub acs: AcsRecord,
    pub moduli_dimension: usize,
    pub integrability: Vec<IntegrabilityRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    /// flags whose M-classes are all even
    pub parity_even: Vec<String>,
    pub acs_exists: Vec<String>,
    pub acs_obstructed: Vec<String>,
    pub inconclusive: Vec<String>,
    /// integrable under the first model of each record
    pub integrable: Vec<String>,
    /// flags whose integrability status differs between models
    pub model_disagreements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub subsets_examined: usize,
    pub flags: Vec<FlagRecord>,
    pub summary: Summary,
}

pub fn flag_id(rs: &RootSystem, members: &[usize]) -> String {
    format!("{} {{{}}}", rs.lie_type, theta_closure(rs, members).to_text(rs))
}

/// Per-flag seed, independent of sweep order.
pub fn flag_seed(master: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ master.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn constants(t: LieType, flip_sign: bool) -> Result<Arc<StructureConstants>, ReportError> {
    let rs = Arc::new(build_root_system(t)?);
    let conv = if flip_sign {
        match rs.positive().find(|&i| rs.height(i) >= 2) {
            Some(i) => SignConvention::Flip(i),
            None => SignConvention::Positive,
        }
    } else {
        SignConvention::Positive
    };
    Ok(Arc::new(generate_constants_with(rs, conv)?))
}

fn obstruction_record(o: &Obstruction) -> ObstructionRecord {
    ObstructionRecord {
        kind: o.kind.clone(),
        dim: o.dim,
        span_labels: o.span_labels.clone(),
        derivation: o.derivation.clone(),
        basis: o.basis.transpose().to_strings(),
    }
}

fn acs_record(v: &AcsVerdict) -> AcsRecord {
    match v {
        AcsVerdict::Exists(w) => AcsRecord::Witness {
            zero_dimensional: w.zero_dimensional,
            construction: w.construction.clone(),
            j: w.j.to_strings(),
        },
        AcsVerdict::Obstructed(o) => AcsRecord::Obstruction(obstruction_record(o)),
        AcsVerdict::Inconclusive(r) => AcsRecord::Inconclusive { reason: r.clone() },
    }
}

pub fn integrability_record(
    im: &IsotropyModel,
    opts: &IntegrabilityOptions,
) -> Result<IntegrabilityRecord, ReportError> {
    let fam = param_family(im)?;
    let v = integrability_verdict(im, &fam, opts);
    Ok(IntegrabilityRecord {
        model: im.model,
        status: v.status,
        parameters: v.parameters,
        equations: v.equations,
        certificate: v.certificate,
        solutions: v
            .solutions
            .iter()
            .map(|s| SolutionRecord {
                choices: s.choices.clone(),
                assignment: s.assignment.clone(),
                j: s.j.to_strings(),
            })
            .collect(),
        samples: v.samples,
        notes: v.notes,
    })
}

pub fn flag_record(
    sc: &Arc<StructureConstants>,
    members: &[usize],
    cfg: &RunConfig,
) -> Result<FlagRecord, ReportError> {
    let rs = &sc.rs;
    let t = rs.lie_type;
    let id = flag_id(rs, members);
    let models = cfg.model.models(t, members, rs);
    let im = build_isotropy(sc.clone(), &FlagSpec::new(rs.clone(), members, models[0]))?;
    let verdict = acs_exists(&im)?;
    let mut integrability = Vec::new();
    if cfg.integrability && verdict.exists() == Some(true) {
        let opts = IntegrabilityOptions {
            seed: flag_seed(cfg.seed, &id),
            samples: cfg.samples,
            ..Default::default()
        };
        for &m in &models {
            let r = if m == im.model {
                integrability_record(&im, &opts)?
            } else {
                let other = build_isotropy(sc.clone(), &FlagSpec::new(rs.clone(), members, m))?;
                integrability_record(&other, &opts)?
            };
            integrability.push(r);
        }
    }
    Ok(FlagRecord {
        id,
        lie_type: t,
        theta: im.theta.member_texts(rs),
        model: im.model,
        module_dim: im.dim(),
        labels: im.labels.clone(),
        m_classes: im
            .classes
            .iter()
            .map(|c| ClassRecord {
                roots: c.roots.iter().map(|&a| rs.text(a)).collect(),
                even: c.even,
            })
            .collect(),
        all_even: im.classes.iter().all(|c| c.even),
        acs: acs_record(&verdict),
        moduli_dimension: moduli_dimension(&im),
        integrability,
    })
}

fn summarize(flags: &[FlagRecord]) -> Summary {
    let mut s = Summary::default();
    for f in flags {
        if f.all_even {
            s.parity_even.push(f.id.clone());
        }
        match f.acs {
            AcsRecord::Witness { .. } => s.acs_exists.push(f.id.clone()),
            AcsRecord::Obstruction(_) => s.acs_obstructed.push(f.id.clone()),
            AcsRecord::Inconclusive { .. } => s.inconclusive.push(f.id.clone()),
        }
        if let Some(first) = f.integrability.first() {
            if first.status == IntegrabilityStatus::IntegrableWitness {
                s.integrable.push(f.id.clone());
            }
            if f.integrability.iter().any(|r| r.status != first.status) {
                s.model_disagreements.push(f.id.clone());
            }
        }
    }
    s
}

/// Runs acs_exists and integrability on every flag passing the parity filter.
/// Records are ordered by family, rank and Θ (by bitmask of simple roots).
pub fn classify(cfg: &RunConfig) -> Result<ClassificationReport, ReportError> {
    let mut tasks: Vec<(Arc<StructureConstants>, Vec<usize>)> = Vec::new();
    let mut subsets_examined = 0;
    let mut types: Vec<LieType> = Vec::new();
    for &(f, lo, hi) in &cfg.families {
        for l in lo..=hi {
            types.push(LieType::new(f, l)?);
        }
    }
    types.sort();
    types.dedup();
    for t in types {
        let sc = constants(t, cfg.flip_sign)?;
        subsets_examined += 1usize << t.rank;
        for members in m_parity_filter(&sc.rs)? {
            tasks.push((sc.clone(), members));
        }
    }
    let flags: Result<Vec<FlagRecord>, ReportError> =
        tasks.par_iter().map(|(sc, m)| flag_record(sc, m, cfg)).collect();
    let flags = flags?;
    Ok(ClassificationReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        subsets_examined,
        summary: summarize(&flags),
        flags,
    })
}

pub fn to_json(r: &ClassificationReport) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ClassificationReport, ReportError> {
    let r: ClassificationReport = serde_json::from_str(text)?;
    if r.schema_version != SCHEMA_VERSION {
        return Err(ReportError::Schema(r.schema_version));
    }
    Ok(r)
}

fn status_name(s: IntegrabilityStatus) -> &'static str {
    match s {
        IntegrabilityStatus::IntegrableWitness => "integrable_witness",
        IntegrabilityStatus::NotIntegrableCertified => "not_integrable_certified",
        IntegrabilityStatus::NotIntegrableSampled => "not_integrable_sampled",
        IntegrabilityStatus::FamilyInfeasible => "family_infeasible",
    }
}

/// One line per flag: `<id> | dim <n> | acs <verdict> | moduli <d> | <model>=<status> ...`.
pub fn to_text(r: &ClassificationReport) -> String {
    let mut out = String::new();
    for f in &r.flags {
        let _ = write!(
            out,
            "{} | dim {} | acs {} | moduli {}",
            f.id,
            f.module_dim,
            f.acs.name(),
            f.moduli_dimension
        );
        for i in &f.integrability {
            let _ = write!(out, " | {}={}", i.model.name(), status_name(i.status));
        }
        out.push('\n');
    }
    let s = &r.summary;
    let _ = writeln!(out, "parity-even flags: {}", s.parity_even.len());
    let _ = writeln!(out, "admit an invariant almost complex structure: {}", s.acs_exists.join("; "));
    let _ = writeln!(out, "integrable: {}", s.integrable.join("; "));
    if !s.inconclusive.is_empty() {
        let _ = writeln!(out, "inconclusive: {}", s.inconclusive.join("; "));
    }
    if !s.model_disagreements.is_empty() {
        let _ = writeln!(out, "model disagreements: {}", s.model_disagreements.join("; "));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyOutcome {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn matrix(rows: &[Vec<String>]) -> Result<QMatrix, ReportError> {
    QMatrix::from_strings(rows).map_err(|e| ReportError::Matrix(e.to_string()))
}

/// Rebuild each flag's module and re-check every certificate in the report:
/// witnesses (J² = -I, commutation), obstruction subspaces, integrable
/// structures (N = 0 on all basis pairs), and certified or sampled
/// integrability verdicts by rerunning the elimination.
pub fn verify_report(r: &ClassificationReport) -> Result<VerifyOutcome, ReportError> {
    let cfg = &r.config;
    let mut scs: BTreeMap<LieType, Arc<StructureConstants>> = BTreeMap::new();
    for f in &r.flags {
        if !scs.contains_key(&f.lie_type) {
            scs.insert(f.lie_type, constants(f.lie_type, cfg.flip_sign)?);
        }
    }
    let results: Result<Vec<(usize, Vec<String>)>, ReportError> = r
        .flags
        .par_iter()
        .map(|f| verify_flag(&scs[&f.lie_type], f, cfg))
        .collect();
    let mut out = VerifyOutcome::default();
    for (n, fails) in results? {
        out.checked += n;
        out.failures.extend(fails);
    }
    if summarize(&r.flags) != r.summary {
        out.failures.push("summary does not match the flag records".into());
    }
    Ok(out)
}

fn verify_flag(
    sc: &Arc<StructureConstants>,
    f: &FlagRecord,
    cfg: &RunConfig,
) -> Result<(usize, Vec<String>), ReportError> {
    let rs = &sc.rs;
    let members = rs.parse_theta(&f.theta.join(","))?;
    let mut fails = Vec::new();
    let mut checked = 0;
    let im = build_isotropy(sc.clone(), &FlagSpec::new(rs.clone(), &members, f.model))?;
    checked += 1;
    if im.dim() != f.module_dim || im.labels != f.labels {
        fails.push(format!("{}: module does not match", f.id));
    }
    match &f.acs {
        AcsRecord::Witness { j, .. } => {
            checked += 1;
            let j = matrix(j)?;
            if j.rows() != im.dim() || (im.dim() > 0 && !verify_acs(&im, &j)) {
                fails.push(format!("{}: witness fails J² = -I or invariance", f.id));
            }
        }
        AcsRecord::Obstruction(o) => {
            checked += 1;
            let basis = if o.basis.is_empty() {
                QMatrix::zeros(im.dim(), 0)
            } else {
                matrix(&o.basis)?.transpose()
            };
            let obs = Obstruction {
                kind: o.kind.clone(),
                dim: o.dim,
                span_labels: span_labels(&im, &basis),
                basis,
                derivation: o.derivation.clone(),
            };
            if !verify_obstruction(&im, &obs) {
                fails.push(format!("{}: obstruction does not re-verify", f.id));
            }
        }
        AcsRecord::Inconclusive { .. } => {}
    }
    for rec in &f.integrability {
        let imm = if rec.model == im.model {
            im.clone()
        } else {
            build_isotropy(sc.clone(), &FlagSpec::new(rs.clone(), &members, rec.model))?
        };
        match rec.status {
            IntegrabilityStatus::IntegrableWitness => {
                for s in &rec.solutions {
                    checked += 1;
                    let j = matrix(&s.j)?;
                    let good = j.rows() == imm.dim()
                        && (imm.dim() == 0 || (verify_acs(&imm, &j) && first_nonzero(&imm, &j).is_none()));
                    if !good {
                        fails.push(format!("{} [{}]: integrable structure fails N = 0", f.id, rec.model.name()));
                    }
                }
            }
            _ => {
                checked += 1;
                let opts = IntegrabilityOptions {
                    seed: flag_seed(cfg.seed, &f.id),
                    samples: cfg.samples,
                    ..Default::default()
                };
                let again = integrability_record(&imm, &opts)?;
                if again.status != rec.status || again.certificate != rec.certificate {
                    fails.push(format!("{} [{}]: integrability verdict does not replay", f.id, rec.model.name()));
                }
            }
        }
    }
    Ok((checked, fails))
}

// ---------------------------------------------------------------------------
// single flag inspection

#[derive(Debug, Clone, Serialize)]
pub struct ComponentRecord {
    pub dim: usize,
    pub class: usize,
    pub endo_type: EndoType,
    pub endo_dim: usize,
    pub span_labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotypicRecord {
    pub members: Vec<usize>,
    pub irrep_dim: usize,
    pub endo_type: EndoType,
}

#[derive(Debug, Clone, Serialize)]
pub struct NijenhuisRecord {
    pub x: String,
    pub y: String,
    pub value: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InspectReport {
    pub schema_version: u32,
    pub flag: FlagRecord,
    pub ktheta_labels: Vec<String>,
    pub components: Vec<ComponentRecord>,
    pub isotypic: Vec<IsotypicRecord>,
    pub commutant_basis: Vec<Vec<Vec<String>>>,
    /// nonzero N(b_i, b_j) for the existence witness
    pub nijenhuis: Vec<NijenhuisRecord>,
}

pub struct InspectOptions {
    pub model: Option<Model>,
    pub seed: u64,
    pub samples: usize,
    pub all_solutions: bool,
    /// express C_l m_theta modules in the u(l) basis A[k,j], S[k,j]
    pub u_basis: bool,
}

pub fn inspect(t: LieType, theta_text: &str, opts: &InspectOptions) -> Result<InspectReport, ReportError> {
    let sc = constants(t, false)?;
    let rs = &sc.rs;
    let members = rs.parse_theta(theta_text)?;
    let id = flag_id(rs, &members);
    let model = opts.model.unwrap_or_else(|| default_model(t, &theta_closure(rs, &members)));
    let mut im = build_isotropy(sc.clone(), &FlagSpec::new(rs.clone(), &members, model))?;
    if opts.u_basis && t.family == Family::C && model == Model::MTheta && im.dim() > 0 {
        let real = crate::chevalley::build_realization(&sc)?;
        im = crate::isotropy::c_unitary_basis(&im, &real)?;
    }
    let verdict = acs_exists(&im)?;
    let mut integrability = Vec::new();
    if verdict.exists() == Some(true) {
        let iopts = IntegrabilityOptions {
            seed: flag_seed(opts.seed, &id),
            samples: opts.samples,
            all_solutions: opts.all_solutions,
            ..Default::default()
        };
        integrability.push(integrability_record(&im, &iopts)?);
    }
    let (components, isotypic) = if im.dim() > 0 {
        let dec = decompose(&im)?;
        (
            dec.components
                .iter()
                .map(|c| ComponentRecord {
                    dim: c.dim(),
                    class: c.class,
                    endo_type: c.endo_type,
                    endo_dim: c.endo_dim(),
                    span_labels: span_labels(&im, &c.basis),
                })
                .collect(),
            dec.isotypic
                .iter()
                .map(|i| IsotypicRecord {
                    members: i.members.clone(),
                    irrep_dim: i.irrep_dim,
                    endo_type: i.endo_type,
                })
                .collect(),
        )
    } else {
        (vec![], vec![])
    };
    let nijenhuis = match &verdict {
        AcsVerdict::Exists(w) if im.dim() > 0 => crate::nijenhuis::nijenhuis_table(&im, &w.j)
            .into_iter()
            .map(|e| NijenhuisRecord {
                x: im.labels[e.i].clone(),
                y: im.labels[e.j].clone(),
                value: e.value.iter().map(crate::exactalg::rational::to_string).collect(),
            })
            .collect(),
        _ => vec![],
    };
    let flag = FlagRecord {
        id,
        lie_type: t,
        theta: im.theta.member_texts(rs),
        model: im.model,
        module_dim: im.dim(),
        labels: im.labels.clone(),
        m_classes: im
            .classes
            .iter()
            .map(|c| ClassRecord {
                roots: c.roots.iter().map(|&a| rs.text(a)).collect(),
                even: c.even,
            })
            .collect(),
        all_even: im.classes.iter().all(|c| c.even),
        acs: acs_record(&verdict),
        moduli_dimension: moduli_dimension(&im),
        integrability,
    };
    Ok(InspectReport {
        schema_version: SCHEMA_VERSION,
        commutant_basis: crate::invariants::commutant(&im).iter().map(|m| m.to_strings()).collect(),
        ktheta_labels: im.ktheta_labels.clone(),
        flag,
        components,
        isotypic,
        nijenhuis,
    })
}

pub fn inspect_text(r: &InspectReport) -> String {
    let f = &r.flag;
    let mut out = String::new();
    let _ = writeln!(out, "{} ({})", f.id, f.model.name());
    let _ = writeln!(out, "module dimension {}", f.module_dim);
    let _ = writeln!(out, "basis: {}", f.labels.join(", "));
    if !r.ktheta_labels.is_empty() {
        let _ = writeln!(out, "k_theta: {}", r.ktheta_labels.join(", "));
    }
    let _ = writeln!(out, "M-classes:");
    for (k, c) in f.m_classes.iter().enumerate() {
        let parity = if c.even { "even" } else { "odd" };
        let _ = writeln!(out, "  {}: {{{}}} {}", k + 1, c.roots.join(", "), parity);
    }
    let _ = writeln!(out, "irreducible components:");
    for (k, c) in r.components.iter().enumerate() {
        let _ = writeln!(
            out,
            "  V{} dim {} class {} {:?} <{}>",
            k + 1,
            c.dim,
            c.class + 1,
            c.endo_type,
            c.span_labels.join(", ")
        );
    }
    for (k, i) in r.isotypic.iter().enumerate() {
        let members: Vec<String> = i.members.iter().map(|m| format!("V{}", m + 1)).collect();
        let _ = writeln!(out, "  isotypic {}: {} ({:?})", k + 1, members.join(" + "), i.endo_type);
    }
    let _ = writeln!(out, "commutant dimension {}", f.moduli_dimension);
    match &f.acs {
        AcsRecord::Witness { construction, j, .. } => {
            let _ = writeln!(out, "invariant almost complex structure: yes");
            for c in construction {
                let _ = writeln!(out, "  {}", c);
            }
            let n = j.len();
            for c in 0..n {
                // column c holds the coordinates of J applied to basis vector c
                let image: Vec<String> = (0..n)
                    .filter(|&r| j[r][c] != "0")
                    .map(|r| match j[r][c].as_str() {
                        "1" => f.labels[r].clone(),
                        "-1" => format!("-{}", f.labels[r]),
                        v => format!("{}*{}", v, f.labels[r]),
                    })
                    .collect();
                let _ = writeln!(out, "  J({}) = {}", f.labels[c], image.join(" + "));
            }
        }
        AcsRecord::Obstruction(o) => {
            let _ = writeln!(out, "invariant almost complex structure: no ({}, dim {})", o.kind, o.dim);
            for s in &o.derivation {
                let _ = writeln!(out, "  {}: {} (dim {})", s.kind, s.description, s.dim);
            }
            let _ = writeln!(out, "  subspace <{}>", o.span_labels.join(", "));
        }
        AcsRecord::Inconclusive { reason } => {
            let _ = writeln!(out, "invariant almost complex structure: inconclusive ({})", reason);
        }
    }
    if !r.nijenhuis.is_empty() {
        let _ = writeln!(out, "nonzero Nijenhuis values for the witness: {}", r.nijenhuis.len());
    }
    for i in &f.integrability {
        let _ = writeln!(out, "integrability: {}", status_name(i.status));
        for s in &i.solutions {
            let vals: Vec<String> = s.assignment.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
            let _ = writeln!(out, "  solution [{}] {}", s.choices.join("; "), vals.join(" "));
        }
        for c in &i.certificate {
            let _ = writeln!(out, "  branch [{}]: {}", c.choices.join("; "), c.end);
        }
        for n in &i.notes {
            let _ = writeln!(out, "  note: {}", n);
        }
    }
    out
}
