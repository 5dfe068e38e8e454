//! Parsers and serializers for the on-disk formats: function JSON/CSV, tile
//! text forms, collection JSON, and split-certificate JSON.  Every parser
//! here accepts untrusted bytes (these are the fuzz-target entry points) and
//! validates before allocating anything sized by the input.

use serde::{Deserialize, Serialize};

use crate::algorithm::{SplitCertificate, SplitKind};
use crate::dyadic::{DyadicFunction, LacunarySequence, MAX_RESOLUTION};
use crate::error::Error;
use crate::tiles::{BiTile, ChoiceFunction, TileCollection, Tree, TreeTop};

#[derive(Serialize, Deserialize)]
pub struct FunctionDto {
    #[serde(rename = "K")]
    pub k: u8,
    pub values: Vec<f64>,
}

/// `{"K": int, "values": [floats]}`.
pub fn parse_function_json(bytes: &[u8]) -> Result<DyadicFunction, Error> {
    let dto: FunctionDto =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    DyadicFunction::new(dto.k, dto.values)
}

pub fn function_to_json(f: &DyadicFunction) -> String {
    serde_json::to_string(&FunctionDto {
        k: f.resolution(),
        values: f.values().to_vec(),
    })
    .expect("plain struct serializes")
}

/// Headerless CSV, one value per line; the line count must be a power of two.
pub fn parse_function_csv(bytes: &[u8]) -> Result<DyadicFunction, Error> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: not a number", lineno + 1)))?;
        values.push(v);
        if values.len() > 1 << MAX_RESOLUTION {
            return Err(Error::ResolutionTooLarge(
                MAX_RESOLUTION as u32 + 1,
                MAX_RESOLUTION as u32,
            ));
        }
    }
    if values.is_empty() || !values.len().is_power_of_two() {
        return Err(Error::Parse(format!(
            "{} lines; expected a power of two",
            values.len()
        )));
    }
    let k = values.len().trailing_zeros() as u8;
    DyadicFunction::new(k, values)
}

pub fn function_to_csv(f: &DyadicFunction) -> String {
    let mut out = String::new();
    for v in f.values() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// JSON array of `"s:m:n"` strings.
pub fn parse_collection_json(bytes: &[u8]) -> Result<TileCollection, Error> {
    let strings: Vec<String> =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    if strings.len() > 1 << 22 {
        return Err(Error::Parse("collection too large".into()));
    }
    TileCollection::from_strings(&strings)
}

pub fn collection_to_json(tiles: &TileCollection) -> String {
    serde_json::to_string(&tiles.to_strings()).expect("strings serialize")
}

#[derive(Serialize, Deserialize)]
pub struct TreeDto {
    /// `"s:m"` time interval of the top.
    pub top_time: String,
    /// `"level:index"` frequency block of the top.
    pub top_omega: String,
    pub members: Vec<String>,
}

impl TreeDto {
    fn from_tree(t: &Tree) -> Self {
        Self {
            top_time: t.top.time.to_string(),
            top_omega: t.top.omega.to_string(),
            members: t.members.iter().map(|m| m.to_string()).collect(),
        }
    }

    fn to_tree(&self) -> Result<Tree, Error> {
        let top = TreeTop {
            time: self.top_time.parse()?,
            omega: self.top_omega.parse()?,
        };
        if top.omega.level != top.time.scale && top.omega.level != top.time.scale + 1 {
            return Err(Error::BadTile(
                "top is neither a bi-tile nor a degenerate area-1 top".into(),
            ));
        }
        let members = self
            .members
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BiTile>, Error>>()?;
        Tree::new(top, members)
    }
}

/// Self-contained certificate file: the split facts plus the raw inputs
/// needed to recompute them.
#[derive(Serialize, Deserialize)]
pub struct CertificateFile {
    pub kind: String,
    pub resolution: u8,
    pub threshold: f64,
    pub mass: f64,
    pub claimed_bound: f64,
    pub measured_ratio: f64,
    pub tree_top_length_sum: f64,
    pub holds: bool,
    pub input: Vec<String>,
    pub small: Vec<String>,
    pub big: Vec<String>,
    pub trees: Vec<TreeDto>,
    /// `f` for size splits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<FunctionDto>,
    /// `G` and the choice values for density splits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_indicator: Option<FunctionDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choice: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<u64>>,
}

pub fn certificate_to_json(
    cert: &SplitCertificate,
    resolution: u8,
    f: Option<&DyadicFunction>,
    g: Option<&DyadicFunction>,
    choice: Option<&ChoiceFunction>,
    seq: Option<&LacunarySequence>,
) -> String {
    let file = CertificateFile {
        kind: match cert.kind {
            SplitKind::Density => "density".into(),
            SplitKind::Size => "size".into(),
        },
        resolution,
        threshold: cert.threshold,
        mass: cert.mass,
        claimed_bound: cert.claimed_bound,
        measured_ratio: cert.measured_ratio,
        tree_top_length_sum: cert.tree_top_length_sum,
        holds: cert.holds,
        input: cert.input.to_strings(),
        small: cert.small.to_strings(),
        big: cert.big.to_strings(),
        trees: cert.trees.iter().map(TreeDto::from_tree).collect(),
        f: f.map(|f| FunctionDto {
            k: f.resolution(),
            values: f.values().to_vec(),
        }),
        g_indicator: g.map(|g| FunctionDto {
            k: g.resolution(),
            values: g.values().to_vec(),
        }),
        choice: choice.map(|c| c.assignment().to_vec()),
        sequence: seq.map(|s| s.terms().to_vec()),
    };
    serde_json::to_string_pretty(&file).expect("certificate serializes")
}

pub struct ParsedCertificate {
    pub certificate: SplitCertificate,
    pub resolution: u8,
    pub f: Option<DyadicFunction>,
    pub g: Option<DyadicFunction>,
    pub choice: Option<ChoiceFunction>,
}

pub fn parse_certificate_json(bytes: &[u8]) -> Result<ParsedCertificate, Error> {
    let file: CertificateFile =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = match file.kind.as_str() {
        "density" => SplitKind::Density,
        "size" => SplitKind::Size,
        other => return Err(Error::Parse(format!("unknown certificate kind '{other}'"))),
    };
    if file.resolution > MAX_RESOLUTION {
        return Err(Error::ResolutionTooLarge(
            file.resolution as u32,
            MAX_RESOLUTION as u32,
        ));
    }
    let cap = 1usize << 22;
    if file.input.len() > cap || file.small.len() > cap || file.big.len() > cap {
        return Err(Error::Parse("collection too large".into()));
    }
    let input = TileCollection::from_strings(&file.input)?;
    let small = TileCollection::from_strings(&file.small)?;
    let big = TileCollection::from_strings(&file.big)?;
    let trees = file
        .trees
        .iter()
        .map(TreeDto::to_tree)
        .collect::<Result<Vec<_>, _>>()?;
    let sum: f64 = trees.iter().map(Tree::top_length).sum();
    let bessel = None; // recomputed on verification for size certificates
    let certificate = SplitCertificate {
        kind,
        input,
        small,
        big,
        trees,
        tree_top_length_sum: file.tree_top_length_sum,
        threshold: file.threshold,
        claimed_bound: file.claimed_bound,
        measured_ratio: file.measured_ratio,
        holds: file.holds,
        mass: file.mass,
        bessel,
    };
    let _ = sum;
    let f = file
        .f
        .map(|dto| DyadicFunction::new(dto.k, dto.values))
        .transpose()?;
    let g = file
        .g_indicator
        .map(|dto| DyadicFunction::new(dto.k, dto.values))
        .transpose()?;
    let choice = match (&file.choice, &file.sequence) {
        (Some(assignment), Some(terms)) => {
            let seq = LacunarySequence::new(terms.clone())?;
            Some(ChoiceFunction::new(
                file.resolution,
                assignment.clone(),
                &seq,
            )?)
        }
        (Some(_), None) => {
            return Err(Error::Parse(
                "choice values without the sequence they come from".into(),
            ))
        }
        _ => None,
    };
    Ok(ParsedCertificate {
        certificate,
        resolution: file.resolution,
        f,
        g,
        choice,
    })
}

/// `"a..b"` (inclusive), e.g. `--m-range 2..10`.
pub fn parse_m_range(s: &str) -> Result<(u32, u32), Error> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("range '{s}' must look like a..b")))?;
    let a: u32 = a
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad range start in '{s}'")))?;
    let b: u32 = b
        .trim()
        .trim_start_matches('=')
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad range end in '{s}'")))?;
    if a > b || b > 30 {
        return Err(Error::Parse(format!("range {a}..{b} out of order or too large")));
    }
    Ok((a, b))
}

/// `"NAME=VALUE"` for constant overrides.
pub fn parse_set_override(s: &str) -> Result<(String, f64), Error> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override '{s}' must look like NAME=VALUE")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value in '{s}'")))?;
    Ok((name.trim().to_string(), v))
}

/// Comma-separated explicit lacunary list, validated for ratio > 1.
pub fn parse_lacunary_list(s: &str) -> Result<LacunarySequence, Error> {
    let terms = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad term '{p}'")))
        })
        .collect::<Result<Vec<u64>, Error>>()?;
    if terms.len() > 4096 {
        return Err(Error::Parse("sequence too long".into()));
    }
    LacunarySequence::new(terms)
}
