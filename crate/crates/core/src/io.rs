//! JSON file formats. Rationals are `"p/q"` strings throughout; maps are
//! written with sorted keys so that serialization is canonical.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circuit::{Circuit, CircuitBuilder, Label, LabelledGraph, SfoGraph};
use crate::class::{bit_string, parse_bit_string, Counterexample, PairPartition, WindabilityWitness, WitnessKind};
use crate::error::{Error, Result};
use crate::matchgates::MatchingsCircuit;
use crate::signature::{IndexSet, Named, Rational, Signature};

/// `"p/q"`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"p/q"` or an integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let int = |x: &str| -> Result<BigInt> {
        x.trim().parse().map_err(|_| Error::Parse(format!("`{s}` is not a rational of the form p/q")))
    };
    match t.split_once('/') {
        Some((p, q)) => {
            let q = int(q)?;
            if q == BigInt::from(0) {
                return Err(Error::Parse(format!("`{s}` has a zero denominator")));
            }
            Ok(Rational::new(int(p)?, q))
        }
        None => Ok(Rational::from_integer(int(t)?)),
    }
}

/// Decimal rendering to 6 significant digits, marked approximate.
pub fn approx_decimal(r: &Rational) -> String {
    use num_traits::ToPrimitive;
    let v = r.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        return "~0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("~{:.*}", (5 - exp) as usize, v)
    } else {
        format!("~{v:.5e}")
    }
}

fn rationals(values: &[String], field: &str) -> Result<Vec<Rational>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| parse_rational(v).map_err(|e| Error::Parse(format!("{field}[{i}]: {e}"))))
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableJson {
    labels: Vec<String>,
    table: Vec<String>,
}

impl TableJson {
    fn of(f: &Signature) -> Self {
        TableJson { labels: f.labels().to_vec(), table: f.table().iter().map(format_rational).collect() }
    }

    fn build(&self, field: &str) -> Result<Signature> {
        let index = IndexSet::new(self.labels.clone()).map_err(|e| Error::Parse(format!("{field}.labels: {e}")))?;
        Signature::new(index, rationals(&self.table, &format!("{field}.table"))?)
            .map_err(|e| Error::Parse(format!("{field}: {e}")))
    }
}

/// A signature entry of a circuit file: a table, or a named family.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SigJson {
    Table(TableJson),
    Named {
        named: String,
        arity: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        param: Option<String>,
    },
}

impl SigJson {
    fn build(&self, field: &str) -> Result<Signature> {
        match self {
            SigJson::Table(t) => t.build(field),
            SigJson::Named { named, arity, param } => {
                let p = |what: &str| -> Result<Rational> {
                    let s = param.as_ref().ok_or_else(|| Error::Parse(format!("{field}: `{named}` needs a {what} in `param`")))?;
                    parse_rational(s).map_err(|e| Error::Parse(format!("{field}.param: {e}")))
                };
                let kind = match named.to_ascii_lowercase().as_str() {
                    "even" => Named::Even,
                    "odd" => Named::Odd,
                    "nae" => Named::Nae,
                    "even-nae" => Named::EvenNae,
                    "or" => Named::Or,
                    "equality" | "eq" => Named::Equality,
                    "edge" => Named::Edge(p("weight")?),
                    "fugacity" => Named::Fugacity(p("fugacity")?),
                    other => return Err(Error::Parse(format!("{field}.named: unknown family `{other}`"))),
                };
                Signature::named(&kind, IndexSet::anonymous(*arity)?).map_err(|e| Error::Parse(format!("{field}: {e}")))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitVertexJson {
    id: String,
    signature: String,
    incidences: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    #[serde(rename = "type")]
    kind: String,
    signatures: BTreeMap<String, SigJson>,
    vertices: Vec<CircuitVertexJson>,
    internal_edges: Vec<[String; 2]>,
    external_edges: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelledVertexJson {
    id: String,
    label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelledJson {
    #[serde(rename = "type")]
    kind: String,
    vertices: Vec<LabelledVertexJson>,
    edges: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SfoJson {
    #[serde(rename = "type")]
    kind: String,
    vertices: Vec<String>,
    /// `[u, v]`, or `[u, v, "skew"]`.
    edges: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McVertexJson {
    id: String,
    incidences: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McJson {
    #[serde(rename = "type")]
    kind: String,
    vertices: Vec<McVertexJson>,
    internal_edges: Vec<[String; 2]>,
    external_edges: Vec<String>,
    /// Keyed by the first incidence of each internal edge.
    weights: BTreeMap<String, String>,
    fugacities: BTreeMap<String, String>,
}

/// Anything the command line reads.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Signature(Signature),
    Circuit(Circuit),
    Labelled(LabelledGraph),
    Sfo(SfoGraph),
    Matchings(MatchingsCircuit),
}

impl Document {
    /// The circuit this document denotes. A signature becomes one vertex
    /// with all its inputs external.
    pub fn to_circuit(&self) -> Result<Circuit> {
        match self {
            Document::Signature(f) => {
                let mut b = CircuitBuilder::new();
                let v = b.add_vertex_with("f", f.labels().to_vec(), f.clone())?;
                for k in 0..f.arity() {
                    let i = b.incidence(v, k);
                    b.external(i);
                }
                b.build()
            }
            Document::Circuit(c) => Ok(c.clone()),
            Document::Labelled(g) => g.to_circuit(),
            Document::Sfo(g) => g.to_nae_parity().to_circuit(),
            Document::Matchings(g) => g.to_circuit(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Signature(_) => "signature",
            Document::Circuit(_) => "circuit",
            Document::Labelled(_) => "nae-parity",
            Document::Sfo(_) => "sfo",
            Document::Matchings(_) => "matchings-circuit",
        }
    }
}

fn typed<T: serde::de::DeserializeOwned>(text: &str, kind: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{kind} file: {e}")))
}

/// Parse any supported file, dispatching on its `"type"` field; a file
/// without one is read as a signature.
pub fn read_document(text: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
    let kind = match v.get("type") {
        None => "signature",
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(Error::Parse("field `type` must be a string".into())),
    };
    match kind {
        "signature" => parse_signature(text).map(Document::Signature),
        "circuit" => parse_circuit(text).map(Document::Circuit),
        "nae-parity" => parse_labelled(text).map(Document::Labelled),
        "sfo" => parse_sfo(text).map(Document::Sfo),
        "matchings-circuit" => parse_matchings(text).map(Document::Matchings),
        other => Err(Error::Parse(format!(
            "type: unknown document type `{other}` (expected signature, circuit, nae-parity, sfo or matchings-circuit)"
        ))),
    }
}

pub fn write_document(d: &Document) -> Result<String> {
    match d {
        Document::Signature(f) => Ok(write_signature(f)),
        Document::Circuit(c) => Ok(write_circuit(c)),
        Document::Labelled(g) => Ok(write_labelled(g)),
        Document::Sfo(g) => Ok(write_sfo(g)),
        Document::Matchings(g) => write_matchings(g),
    }
}

fn pretty<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_signature(text: &str) -> Result<Signature> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Tagged {
        #[serde(rename = "type", default)]
        _kind: Option<String>,
        labels: Vec<String>,
        table: Vec<String>,
    }
    let t: Tagged = typed(text, "signature")?;
    TableJson { labels: t.labels, table: t.table }.build("signature")
}

pub fn write_signature(f: &Signature) -> String {
    pretty(&TableJson::of(f))
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let j: CircuitJson = typed(text, "circuit")?;
    let mut sigs = HashMap::new();
    for (name, s) in &j.signatures {
        sigs.insert(name.as_str(), s.build(&format!("signatures.{name}"))?);
    }
    let mut b = CircuitBuilder::new();
    for (k, v) in j.vertices.iter().enumerate() {
        let field = format!("vertices[{k}]");
        let sig = sigs
            .get(v.signature.as_str())
            .ok_or_else(|| Error::Parse(format!("{field}.signature: no signature named `{}`", v.signature)))?;
        if sig.arity() != v.incidences.len() {
            return Err(Error::Parse(format!(
                "{field}: signature `{}` has arity {} but the vertex lists {} incidences",
                v.signature,
                sig.arity(),
                v.incidences.len()
            )));
        }
        b.add_vertex_with(&v.id, v.incidences.clone(), sig.clone())
            .map_err(|e| Error::Parse(format!("{field}: {e}")))?;
    }
    let look = |b: &CircuitBuilder, name: &str, field: &str| {
        b.lookup(name).map_err(|_| Error::Parse(format!("{field}: unknown incidence `{name}`")))
    };
    for (k, [x, y]) in j.internal_edges.iter().enumerate() {
        let field = format!("internal_edges[{k}]");
        let (a, c) = (look(&b, x, &field)?, look(&b, y, &field)?);
        b.connect(a, c);
    }
    for (k, x) in j.external_edges.iter().enumerate() {
        let a = look(&b, x, &format!("external_edges[{k}]"))?;
        b.external(a);
    }
    b.build().map_err(|e| Error::Parse(format!("circuit: {e}")))
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut signatures = BTreeMap::new();
    let mut by_table: HashMap<Vec<Rational>, String> = HashMap::new();
    let mut vertices = Vec::new();
    for v in c.vertices() {
        let key = v.signature.table().to_vec();
        let name = by_table
            .entry(key)
            .or_insert_with(|| {
                let name = format!("s{}", signatures.len());
                let anon = v.signature.relabel(IndexSet::anonymous(v.signature.arity()).expect("arity within cap"));
                signatures.insert(name.clone(), SigJson::Table(TableJson::of(&anon.expect("same arity"))));
                name
            })
            .clone();
        vertices.push(CircuitVertexJson {
            id: v.name.clone(),
            signature: name,
            incidences: v.incidences.iter().map(|&i| c.incidence_name(i).to_string()).collect(),
        });
    }
    let name = |i: usize| c.incidence_name(i).to_string();
    pretty(&CircuitJson {
        kind: "circuit".into(),
        signatures,
        vertices,
        internal_edges: c.edges().iter().map(|&(a, b)| [name(a), name(b)]).collect(),
        external_edges: c.externals().iter().map(|&i| name(i)).collect(),
    })
}

fn vertex_index(ids: &HashMap<&str, usize>, name: &str, field: &str) -> Result<usize> {
    ids.get(name).copied().ok_or_else(|| Error::Parse(format!("{field}: unknown vertex `{name}`")))
}

fn id_map<'a>(ids: impl Iterator<Item = &'a String>, field: &str) -> Result<HashMap<&'a str, usize>> {
    let mut map = HashMap::new();
    for (k, id) in ids.enumerate() {
        if map.insert(id.as_str(), k).is_some() {
            return Err(Error::Parse(format!("{field}[{k}]: duplicate vertex `{id}`")));
        }
    }
    Ok(map)
}

pub fn parse_labelled(text: &str) -> Result<LabelledGraph> {
    let j: LabelledJson = typed(text, "nae-parity")?;
    let ids = id_map(j.vertices.iter().map(|v| &v.id), "vertices")?;
    let mut vertices = Vec::with_capacity(j.vertices.len());
    for (k, v) in j.vertices.iter().enumerate() {
        let label = match v.label.to_ascii_lowercase().as_str() {
            "even" => Label::Even,
            "odd" => Label::Odd,
            "nae" => Label::Nae,
            other => {
                return Err(Error::Parse(format!("vertices[{k}].label: unknown label `{other}` (Even, Odd or NAE)")))
            }
        };
        vertices.push((v.id.clone(), label));
    }
    let edges = j
        .edges
        .iter()
        .enumerate()
        .map(|(k, [u, v])| {
            let f = format!("edges[{k}]");
            Ok((vertex_index(&ids, u, &f)?, vertex_index(&ids, v, &f)?))
        })
        .collect::<Result<_>>()?;
    Ok(LabelledGraph { vertices, edges })
}

pub fn write_labelled(g: &LabelledGraph) -> String {
    let label = |l: Label| match l {
        Label::Even => "Even",
        Label::Odd => "Odd",
        Label::Nae => "NAE",
    };
    pretty(&LabelledJson {
        kind: "nae-parity".into(),
        vertices: g
            .vertices
            .iter()
            .map(|(id, l)| LabelledVertexJson { id: id.clone(), label: label(*l).into() })
            .collect(),
        edges: g.edges.iter().map(|&(u, v)| [g.vertices[u].0.clone(), g.vertices[v].0.clone()]).collect(),
    })
}

pub fn parse_sfo(text: &str) -> Result<SfoGraph> {
    let j: SfoJson = typed(text, "sfo")?;
    let ids = id_map(j.vertices.iter(), "vertices")?;
    let edges = j
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let f = format!("edges[{k}]");
            let skew = match e.len() {
                2 => false,
                3 if e[2] == "skew" => true,
                _ => return Err(Error::Parse(format!("{f}: expected [u, v] or [u, v, \"skew\"]"))),
            };
            Ok((vertex_index(&ids, &e[0], &f)?, vertex_index(&ids, &e[1], &f)?, skew))
        })
        .collect::<Result<_>>()?;
    Ok(SfoGraph { vertices: j.vertices, edges })
}

pub fn write_sfo(g: &SfoGraph) -> String {
    pretty(&SfoJson {
        kind: "sfo".into(),
        vertices: g.vertices.clone(),
        edges: g
            .edges
            .iter()
            .map(|&(u, v, skew)| {
                let mut e = vec![g.vertices[u].clone(), g.vertices[v].clone()];
                if skew {
                    e.push("skew".into());
                }
                e
            })
            .collect(),
    })
}

pub fn parse_matchings(text: &str) -> Result<MatchingsCircuit> {
    let j: McJson = typed(text, "matchings-circuit")?;
    let mut g = MatchingsCircuit::new();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (k, v) in j.vertices.iter().enumerate() {
        let field = format!("vertices[{k}]");
        let lambda = match j.fugacities.get(&v.id) {
            Some(s) => parse_rational(s).map_err(|e| Error::Parse(format!("fugacities.{}: {e}", v.id)))?,
            None => Rational::from_integer(0.into()),
        };
        let id = g.add_vertex(&v.id, lambda).map_err(|e| Error::Parse(format!("{field}: {e}")))?;
        for inc in &v.incidences {
            if owner.insert(inc.as_str(), id).is_some() {
                return Err(Error::Parse(format!("{field}: incidence `{inc}` listed twice")));
            }
        }
    }
    if let Some(k) = j.fugacities.keys().find(|k| g.vertex_id(k).is_none()) {
        return Err(Error::Parse(format!("fugacities.{k}: unknown vertex")));
    }
    let look = |name: &str, field: &str| {
        owner.get(name).copied().ok_or_else(|| Error::Parse(format!("{field}: unknown incidence `{name}`")))
    };
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut weighted = 0;
    for (k, [x, y]) in j.internal_edges.iter().enumerate() {
        let field = format!("internal_edges[{k}]");
        let (u, v) = (look(x, &field)?, look(y, &field)?);
        let w = match (j.weights.get(x), j.weights.get(y)) {
            (Some(_), Some(_)) => return Err(Error::Parse(format!("{field}: weight given at both ends"))),
            (Some(s), None) | (None, Some(s)) => {
                weighted += 1;
                parse_rational(s).map_err(|e| Error::Parse(format!("weights.{x}: {e}")))?
            }
            (None, None) => Rational::from_integer(1.into()),
        };
        for inc in [x, y] {
            if seen.insert(inc.as_str(), k).is_some() {
                return Err(Error::Parse(format!("{field}: incidence `{inc}` used twice")));
            }
        }
        g.add_edge(u, v, w).map_err(|e| Error::Parse(format!("{field}: {e}")))?;
    }
    if weighted != j.weights.len() {
        return Err(Error::Parse("weights: a key is not an internal-edge incidence".into()));
    }
    for (k, x) in j.external_edges.iter().enumerate() {
        let field = format!("external_edges[{k}]");
        if seen.insert(x.as_str(), usize::MAX).is_some() {
            return Err(Error::Parse(format!("{field}: incidence `{x}` used twice")));
        }
        g.add_external(x, look(x, &field)?).map_err(|e| Error::Parse(format!("{field}: {e}")))?;
    }
    if let Some(inc) = owner.keys().find(|i| !seen.contains_key(*i)) {
        return Err(Error::Parse(format!("incidence `{inc}` is neither internal nor external")));
    }
    Ok(g)
}

/// Internal incidences are named `v.k` with slots counted per vertex;
/// external incidences carry their labels.
pub fn write_matchings(g: &MatchingsCircuit) -> Result<String> {
    let names = g.vertex_names();
    let mut incidences: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    let fresh = |v: usize, inc: &mut Vec<Vec<String>>| {
        let k = inc[v].len();
        let name = format!("{}.{k}", names[v]);
        inc[v].push(name.clone());
        name
    };
    let mut internal = Vec::new();
    let mut weights = BTreeMap::new();
    for &(u, v, ref w) in g.edges() {
        let a = fresh(u, &mut incidences);
        let b = fresh(v, &mut incidences);
        weights.insert(a.clone(), format_rational(w));
        internal.push([a, b]);
    }
    let mut external = Vec::new();
    for (label, v) in g.externals() {
        incidences[*v].push(label.clone());
        external.push(label.clone());
    }
    let mut all = std::collections::HashSet::new();
    if let Some(dup) = incidences.iter().flatten().find(|i| !all.insert(i.as_str())) {
        return Err(Error::InvalidCircuit(format!("incidence name `{dup}` is ambiguous")));
    }
    let fugacities = names.iter().cloned().zip(g.fugacities().iter().map(format_rational)).collect();
    Ok(pretty(&McJson {
        kind: "matchings-circuit".into(),
        vertices: names
            .iter()
            .zip(incidences)
            .map(|(id, incidences)| McVertexJson { id: id.clone(), incidences })
            .collect(),
        internal_edges: internal,
        external_edges: external,
        weights,
        fugacities,
    }))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessJson {
    #[serde(rename = "type")]
    kind: String,
    /// `even` (pairings only) or `general` (pairs and singletons).
    partitions: String,
    labels: Vec<String>,
    /// `"x|y|M"`: bit strings with label 0 first, `M` as `{a,b}{c}`.
    entries: BTreeMap<String, String>,
}

pub fn write_witness(w: &WindabilityWitness) -> String {
    let labels = w.index_set().labels();
    let n = labels.len();
    let entries = w
        .entries()
        .map(|((x, y, m), v)| (format!("{}|{}|{}", bit_string(*x, n), bit_string(*y, n), m.render(labels)), format_rational(v)))
        .collect();
    pretty(&WitnessJson {
        kind: "windability-witness".into(),
        partitions: match w.kind() {
            WitnessKind::Even => "even".into(),
            WitnessKind::General => "general".into(),
        },
        labels: labels.to_vec(),
        entries,
    })
}

fn parse_partition(s: &str, index: &IndexSet) -> Result<PairPartition> {
    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('{')
            .and_then(|r| r.split_once('}'))
            .ok_or_else(|| Error::Parse(format!("partition `{s}` is not of the form {{a,b}}{{c}}")))?;
        let pos = |l: &str| -> Result<u8> {
            index.position(l).map(|p| p as u8).ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        match body.0.split(',').collect::<Vec<_>>()[..] {
            [a] => singles.push(pos(a)?),
            [a, b] => pairs.push((pos(a)?, pos(b)?)),
            _ => return Err(Error::Parse(format!("block `{{{}}}` has more than two labels", body.0))),
        }
        rest = body.1;
    }
    Ok(PairPartition::new(pairs, singles))
}

pub fn parse_witness(text: &str) -> Result<WindabilityWitness> {
    let j: WitnessJson = typed(text, "windability-witness")?;
    let index = IndexSet::new(j.labels.clone())?;
    let n = index.len();
    let kind = match j.partitions.as_str() {
        "even" => WitnessKind::Even,
        "general" => WitnessKind::General,
        other => return Err(Error::Parse(format!("partitions: expected even or general, got `{other}`"))),
    };
    let mut w = WindabilityWitness::new(index.clone(), kind);
    for (key, v) in &j.entries {
        let parts: Vec<&str> = key.split('|').collect();
        let [x, y, m] = parts[..] else {
            return Err(Error::Parse(format!("entries.{key}: expected `x|y|M`")));
        };
        let ctx = |e: Error| Error::Parse(format!("entries.{key}: {e}"));
        let x = parse_bit_string(x, n).map_err(ctx)?;
        let y = parse_bit_string(y, n).map_err(ctx)?;
        let m = parse_partition(m, &index).map_err(ctx)?;
        w.set(x, y, m, parse_rational(v).map_err(ctx)?);
    }
    Ok(w)
}

#[derive(Serialize)]
struct CounterexampleJson<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    ordering: &'static str,
    labels: &'a [String],
    /// Pinned inputs, `-` where free.
    pinning: String,
    product: TableJson,
    columns: Vec<String>,
    multipliers: Vec<String>,
}

/// The failing pinning with its Farkas vector. `labels` names the inputs
/// of the tested signature.
pub fn write_counterexample(labels: &[String], c: &Counterexample) -> String {
    let pinning = (0..labels.len())
        .map(|i| match (c.pinned >> i & 1, c.bits >> i & 1) {
            (0, _) => '-',
            (_, 1) => '1',
            _ => '0',
        })
        .collect();
    let sys = &c.infeasibility.system;
    let free = c.product.labels();
    pretty(&CounterexampleJson {
        kind: "not-windable",
        ordering: "one multiplier per configuration of `product` in table order (first label is the least significant bit); \
                   columns are the orbit variables D(x, M); the multipliers y satisfy y·A >= 0 column-wise and y·b < 0",
        labels,
        pinning,
        product: TableJson::of(&c.product),
        columns: sys.columns.iter().map(|(x, m)| format!("{}|{}", bit_string(*x, free.len()), m.render(free))).collect(),
        multipliers: c.infeasibility.certificate.multipliers.iter().map(format_rational).collect(),
    })
}
