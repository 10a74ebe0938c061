//! Input and output documents. This is the only place that serializes
//! anything: exact integers travel as decimal strings, and the decimal
//! rendering of the threshold is advisory.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use lct_core::constellation::{Branch, Constellation, CurveSpec, PointId, PointRecord};
use lct_core::invariants::BranchInvariants;
use lct_core::lct::{LctReport, Rat};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointDoc {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satellite_of: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub at: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub points: Vec<PointDoc>,
    pub branches: Vec<BranchDoc>,
}

pub enum LoadedInput {
    Curve(CurveSpec),
    /// Constellation plus exponents of the marked simple ideals.
    Ideal(Constellation, BTreeMap<PointId, u64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorDoc {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorList {
    pub errors: Vec<ErrorDoc>,
}

pub fn error_code(err: &lct_core::Error) -> &'static str {
    use lct_core::Error::*;
    match err {
        MissingRoot => "MissingRoot",
        DanglingParent { .. } => "DanglingParent",
        InvalidSatellite { .. } => "InvalidSatellite",
        OrderViolation { .. } => "OrderViolation",
        NonContiguousIds { .. } => "NonContiguousIds",
        InvalidPoint(_) => "InvalidPoint",
        InvalidBranch(_) => "InvalidBranch",
        BranchOffConstellation { .. } => "BranchOffConstellation",
        UncoveredPoint(_) => "UncoveredPoint",
        SameBranch => "SameBranch",
        PointNotInF(_) => "PointNotInF",
        NotInVLess { .. } => "NotInVLess",
        NoDistinguishedVertex(_) => "NoDistinguishedVertex",
        ExcludedInput(_) => "ExcludedInput",
        NotTwoBranches(_) => "NotTwoBranches",
        MethodDisagreement(_) => "MethodDisagreement",
        NotCoprime(..) => "NotCoprime",
        BadOrder(..) => "BadOrder",
        GenerationFailed { .. } => "GenerationFailed",
        EmptyIdeal => "EmptyIdeal",
        ZeroValuation(_) => "ZeroValuation",
    }
}

pub fn parse_input(text: &str) -> Result<LoadedInput, ErrorList> {
    let doc: InputDocument = serde_json::from_str(text).map_err(|e| ErrorList {
        errors: vec![ErrorDoc {
            code: "ParseError".into(),
            message: e.to_string(),
        }],
    })?;
    if doc.version != SCHEMA_VERSION {
        return Err(ErrorList {
            errors: vec![ErrorDoc {
                code: "UnsupportedVersion".into(),
                message: format!("expected version {SCHEMA_VERSION}, got {}", doc.version),
            }],
        });
    }
    let core_err = |e: lct_core::Error| ErrorList {
        errors: vec![ErrorDoc {
            code: error_code(&e).into(),
            message: e.to_string(),
        }],
    };

    // multiplicities expand into that many curvettes; keep the expansion
    // within a sane budget
    const MULTIPLICITY_BUDGET: u64 = 512;
    let total_multiplicity: u64 = doc
        .branches
        .iter()
        .map(|b| b.multiplicity.unwrap_or(1).max(1))
        .sum();
    if total_multiplicity > MULTIPLICITY_BUDGET {
        return Err(ErrorList {
            errors: vec![ErrorDoc {
                code: "MultiplicityBudget".into(),
                message: format!(
                    "total multiplicity {total_multiplicity} exceeds the supported \
                     budget of {MULTIPLICITY_BUDGET} general curves"
                ),
            }],
        });
    }

    let records: Vec<PointRecord> = doc
        .points
        .iter()
        .map(|p| PointRecord {
            id: PointId::new(p.id),
            parent: p.parent.map(PointId::new),
            satellite_of: p.satellite_of.map(PointId::new),
        })
        .collect();
    let constellation = Constellation::from_records(records).map_err(core_err)?;

    match doc.mode.as_deref() {
        None | Some("curve") => {
            let branches: Vec<Branch> = doc
                .branches
                .iter()
                .enumerate()
                .map(|(i, b)| Branch {
                    name: b.name.clone().unwrap_or_else(|| format!("C{}", i + 1)),
                    at: PointId::new(b.at),
                    multiplicity: b.multiplicity.unwrap_or(1).max(1),
                })
                .collect();
            let spec = CurveSpec::new(constellation, branches).map_err(core_err)?;
            Ok(LoadedInput::Curve(spec))
        }
        Some("ideal") => {
            let mut exponents: BTreeMap<PointId, u64> = BTreeMap::new();
            for b in &doc.branches {
                let at = PointId::new(b.at);
                if !constellation.contains(at) {
                    return Err(core_err(lct_core::Error::InvalidPoint(b.at)));
                }
                *exponents.entry(at).or_default() += b.multiplicity.unwrap_or(1);
            }
            Ok(LoadedInput::Ideal(constellation, exponents))
        }
        Some(other) => Err(ErrorList {
            errors: vec![ErrorDoc {
                code: "UnknownMode".into(),
                message: format!("mode must be `curve` or `ideal`, got `{other}`"),
            }],
        }),
    }
}

pub fn spec_to_document(spec: &CurveSpec) -> InputDocument {
    InputDocument {
        version: SCHEMA_VERSION,
        mode: None,
        points: spec
            .constellation
            .records()
            .iter()
            .map(|r| PointDoc {
                id: r.id.index(),
                parent: r.parent.map(PointId::index),
                satellite_of: r.satellite_of.map(PointId::index),
            })
            .collect(),
        branches: spec
            .branches
            .iter()
            .map(|b| BranchDoc {
                name: Some(b.name.clone()),
                at: b.at.index(),
                multiplicity: (b.multiplicity != 1).then_some(b.multiplicity),
            })
            .collect(),
    }
}

/// Truncated decimal rendering with the given number of significant
/// digits. Advisory only; the exact value is the num/den pair.
pub fn decimal_approx(value: &Rat, significant: usize) -> String {
    let negative = value.is_negative();
    let num = value.numer().abs();
    let den = value.denom().clone();
    let (int_part, mut rem) = (&num / &den, &num % &den);
    let mut digits_seen = if int_part.is_zero() {
        0
    } else {
        int_part.to_string().len()
    };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if rem.is_zero() || digits_seen >= significant {
        return out;
    }
    out.push('.');
    let ten = BigInt::from(10);
    while digits_seen < significant && !rem.is_zero() {
        rem *= &ten;
        let digit = &rem / &den;
        rem %= &den;
        out.push_str(&digit.to_string());
        if digits_seen > 0 || !digit.is_zero() {
            digits_seen += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalDoc {
    pub num: String,
    pub den: String,
    pub decimal_approx: String,
}

impl RationalDoc {
    pub fn from_rat(value: &Rat) -> RationalDoc {
        RationalDoc {
            num: value.numer().to_string(),
            den: value.denom().to_string(),
            decimal_approx: decimal_approx(value, 20),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchInvariantsDoc {
    pub name: String,
    pub at: usize,
    pub multiplicity: u64,
    pub beta0: String,
    pub beta1: String,
    pub e1: String,
    pub l0: usize,
    pub smooth: bool,
    pub terminal_satellites: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

pub fn branch_doc(branch: &Branch, inv: &BranchInvariants) -> BranchInvariantsDoc {
    BranchInvariantsDoc {
        name: branch.name.clone(),
        at: branch.at.index(),
        multiplicity: branch.multiplicity,
        beta0: inv.beta0.to_string(),
        beta1: inv.beta1.to_string(),
        e1: inv.e1.to_string(),
        l0: inv.l0,
        smooth: inv.smooth,
        terminal_satellites: inv.terminal_satellites.iter().map(|p| p.index()).collect(),
        t: inv.t_min.map(|p| p.index()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaEntry {
    pub vertex: usize,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateEntry {
    pub point: usize,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionEntry {
    pub i: usize,
    pub s: usize,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDocument {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub lct: RationalDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinguished_vertex: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_kind: Option<&'static str>,
    pub method: &'static str,
    pub methods_run: Vec<&'static str>,
    pub agreement: bool,
    pub branches: Vec<BranchInvariantsDoc>,
    /// Weight values over the vertices of `V`.
    pub sigma: Vec<SigmaEntry>,
    /// Candidates over the point set `F`.
    pub candidates: Vec<CandidateEntry>,
    pub intersections: Vec<IntersectionEntry>,
    pub argmin: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Builds the full output document from a report. The sigma table is
/// filtered to the vertices of `V` (the candidates keep all of `F`).
pub fn output_document(
    spec: &CurveSpec,
    report: &LctReport,
    v_vertices: &std::collections::BTreeSet<PointId>,
    timestamp: Option<u64>,
    extra_warnings: Vec<String>,
) -> OutputDocument {
    let sigma = report
        .sigma_table
        .as_ref()
        .map(|table| {
            table
                .values
                .iter()
                .filter(|(p, _)| v_vertices.contains(p))
                .map(|(p, v)| SigmaEntry {
                    vertex: p.index(),
                    value: v.numer().to_string(),
                })
                .collect()
        })
        .unwrap_or_default();
    let candidates = report
        .candidate_table
        .iter()
        .map(|(p, v)| CandidateEntry {
            point: p.index(),
            num: v.numer().to_string(),
            den: v.denom().to_string(),
        })
        .collect();
    let mut intersections = Vec::new();
    for i in 0..spec.branch_count() {
        for s in i + 1..spec.branch_count() {
            intersections.push(IntersectionEntry {
                i: i + 1,
                s: s + 1,
                value: report.intersection_matrix[i][s].to_string(),
            });
        }
    }
    let mut warnings: Vec<String> = report
        .flags
        .iter()
        .map(|f| f.as_str().to_string())
        .collect();
    warnings.extend(extra_warnings);

    OutputDocument {
        version: SCHEMA_VERSION,
        timestamp,
        lct: RationalDoc::from_rat(&report.lct),
        distinguished_vertex: report.distinguished_vertex.map(PointId::index),
        vertex_kind: report.vertex_kind.map(|k| k.as_str()),
        method: report.method.as_str(),
        methods_run: report.methods_run.iter().map(|m| m.as_str()).collect(),
        agreement: report.method == lct_core::lct::Method::AllAgree,
        branches: spec
            .branches
            .iter()
            .zip(&report.branch_invariants)
            .map(|(b, inv)| branch_doc(b, inv))
            .collect(),
        sigma,
        candidates,
        intersections,
        argmin: report.argmin.iter().map(|p| p.index()).collect(),
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn decimal_rendering() {
        let r = Rat::new(BigInt::from(11), BigInt::from(134));
        assert_eq!(decimal_approx(&r, 20), "0.082089552238805970149");
        let five_sixths = Rat::new(BigInt::from(5), BigInt::from(6));
        assert_eq!(decimal_approx(&five_sixths, 5), "0.83333");
        let exact = Rat::new(BigInt::from(1), BigInt::from(4));
        assert_eq!(decimal_approx(&exact, 20), "0.25");
        let unit = Rat::new(BigInt::from(3), BigInt::from(1));
        assert_eq!(decimal_approx(&unit, 20), "3");
    }

    #[test]
    fn parse_round_trip() {
        let text = r#"{
            "version": 1,
            "points": [
                {"id": 1},
                {"id": 2, "parent": 1},
                {"id": 3, "parent": 2, "satellite_of": 1}
            ],
            "branches": [{"name": "C1", "at": 3}]
        }"#;
        match parse_input(text).unwrap() {
            LoadedInput::Curve(spec) => {
                assert_eq!(spec.constellation.len(), 3);
                assert_eq!(spec.branches[0].name, "C1");
            }
            LoadedInput::Ideal(..) => panic!("expected curve mode"),
        }
    }

    #[test]
    fn parse_rejects_bad_satellite() {
        let text = r#"{
            "version": 1,
            "points": [
                {"id": 1},
                {"id": 2, "parent": 1},
                {"id": 3, "parent": 2, "satellite_of": 2}
            ],
            "branches": [{"at": 3}]
        }"#;
        match parse_input(text) {
            Err(errors) => assert_eq!(errors.errors[0].code, "InvalidSatellite"),
            Ok(_) => panic!("invalid satellite accepted"),
        }
    }
}
