use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::rng::SeededRng;
use crate::score::Score;

/// Identifier of a node. Regular UEs are `1..=n`; `0` is the edge server.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UeId(pub u32);

impl UeId {
    pub const EDGE: UeId = UeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_edge(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for UeId {
    fn from(v: u32) -> Self {
        UeId(v)
    }
}

/// Parameters of an edge server attached as node 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeServerSpec {
    pub lii0: Score,
    /// `lxi_to_edge[i]` is LXI from UE `i + 1` toward node 0.
    pub lxi_to_edge: Vec<Score>,
}

impl EdgeServerSpec {
    pub const DEFAULT_LII: Score = Score::from_int(10);
    pub const DEFAULT_LXI: Score = Score::from_int(1);

    /// LII 10 and LXI 1 from every UE.
    pub fn default_for(n: usize) -> Self {
        EdgeServerSpec {
            lii0: Self::DEFAULT_LII,
            lxi_to_edge: vec![Self::DEFAULT_LXI; n],
        }
    }
}

/// A set of `n` UEs with their leader indices.
///
/// Storage is indexed by node id: slot 0 belongs to the edge server and is
/// all zeros when no edge server is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    has_edge_server: bool,
    lii: Vec<Score>,
    lxi: Vec<Score>,
}

impl Instance {
    /// Builds an instance of regular UEs. `lii[i]` and `lxi[i][j]` refer to
    /// UEs `i + 1` and `j + 1`.
    pub fn new(lii: Vec<Score>, lxi: Vec<Vec<Score>>) -> Result<Self, ModelError> {
        let n = lii.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        if lxi.len() != n {
            return Err(ModelError::invalid(
                "lxi",
                format!("expected {n} rows, found {}", lxi.len()),
            ));
        }
        let mut inst = Instance::zeroed(n);
        for (i, v) in lii.into_iter().enumerate() {
            inst.lii[i + 1] = v;
        }
        for (m, row) in lxi.into_iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::invalid(
                    format!("lxi[{m}]"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            for (k, v) in row.into_iter().enumerate() {
                let idx = inst.cell(m + 1, k + 1);
                inst.lxi[idx] = v;
            }
        }
        inst.validate()?;
        Ok(inst)
    }

    /// Integer convenience constructor.
    pub fn from_ints<R: AsRef<[i64]>>(lii: &[i64], lxi: &[R]) -> Result<Self, ModelError> {
        Instance::new(
            lii.iter().map(|&v| Score::from_int(v)).collect(),
            lxi.iter()
                .map(|r| r.as_ref().iter().map(|&v| Score::from_int(v)).collect())
                .collect(),
        )
    }

    fn zeroed(n: usize) -> Self {
        Instance {
            n,
            has_edge_server: false,
            lii: vec![Score::ZERO; n + 1],
            lxi: vec![Score::ZERO; (n + 1) * (n + 1)],
        }
    }

    fn cell(&self, m: usize, k: usize) -> usize {
        m * (self.n + 1) + k
    }

    /// Number of regular UEs.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge_server(&self) -> bool {
        self.has_edge_server
    }

    pub fn contains(&self, id: UeId) -> bool {
        let i = id.index();
        (1..=self.n).contains(&i) || (i == 0 && self.has_edge_server)
    }

    pub fn lii(&self, id: UeId) -> Score {
        self.lii[id.index()]
    }

    /// LXI from `m` toward `n`.
    pub fn lxi(&self, m: UeId, n: UeId) -> Score {
        self.lxi[self.cell(m.index(), n.index())]
    }

    /// Regular UEs `1..=n`.
    pub fn ues(&self) -> impl DoubleEndedIterator<Item = UeId> + Clone {
        (1..=self.n as u32).map(UeId)
    }

    /// All nodes, including the edge server first when present.
    pub fn nodes(&self) -> impl Iterator<Item = UeId> + Clone {
        let start = if self.has_edge_server { 0 } else { 1 };
        (start..=self.n as u32).map(UeId)
    }

    /// LII values of the regular UEs in id order.
    pub fn ue_liis(&self) -> &[Score] {
        &self.lii[1..]
    }

    /// Checks range, diagonal and edge-server invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        for id in self.nodes() {
            let v = self.lii(id);
            if !v.in_unit_range() {
                return Err(ModelError::invalid(
                    format!("lii[{}]", self.json_index(id)),
                    format!("value {v} outside [0, 10]"),
                ));
            }
        }
        for m in self.nodes() {
            for k in self.nodes() {
                let v = self.lxi(m, k);
                let field = || format!("lxi[{}][{}]", self.json_index(m), self.json_index(k));
                if !v.in_unit_range() {
                    return Err(ModelError::invalid(
                        field(),
                        format!("value {v} outside [0, 10]"),
                    ));
                }
                if m == k && !v.is_zero() {
                    return Err(ModelError::invalid(field(), "diagonal entries must be 0"));
                }
                if m.is_edge() && !v.is_zero() {
                    return Err(ModelError::invalid(
                        field(),
                        "edge server row must be all zeros (node 0 never follows)",
                    ));
                }
            }
        }
        if self.has_edge_server && !self.lii(UeId::EDGE).is_positive() {
            return Err(ModelError::invalid("lii[0]", "edge server LII must be > 0"));
        }
        Ok(())
    }

    /// Position of `id` in the JSON arrays.
    fn json_index(&self, id: UeId) -> usize {
        if self.has_edge_server {
            id.index()
        } else {
            id.index() - 1
        }
    }

    /// Returns a copy with node 0 attached: LII_0 = `lii0`, a zero row, and
    /// `lxi_to_edge[i]` as LXI from UE `i + 1` toward node 0.
    pub fn attach_edge_server(&self, spec: &EdgeServerSpec) -> Result<Instance, ModelError> {
        if self.has_edge_server {
            return Err(ModelError::EdgeServerPresent);
        }
        if !spec.lii0.is_positive() {
            return Err(ModelError::EdgeServerLii);
        }
        if spec.lxi_to_edge.len() != self.n {
            return Err(ModelError::invalid(
                "lxi_to_edge",
                format!(
                    "expected {} entries, found {}",
                    self.n,
                    spec.lxi_to_edge.len()
                ),
            ));
        }
        let mut out = self.clone();
        out.has_edge_server = true;
        out.lii[0] = spec.lii0;
        for (i, &v) in spec.lxi_to_edge.iter().enumerate() {
            let idx = out.cell(i + 1, 0);
            out.lxi[idx] = v;
        }
        out.validate()?;
        Ok(out)
    }

    /// Copy with the given LII overrides for regular UEs.
    pub fn with_lii(&self, lii: &[Score]) -> Result<Instance, ModelError> {
        if lii.len() != self.n {
            return Err(ModelError::invalid("lii", "length mismatch"));
        }
        let mut out = self.clone();
        out.lii[1..].copy_from_slice(lii);
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    /// Parses and validates an instance file.
    pub fn from_json(text: &str) -> Result<Instance, ModelError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_instance()
    }

    pub fn load(path: &Path) -> std::io::Result<Result<Instance, ModelError>> {
        Ok(Instance::from_json(&std::fs::read_to_string(path)?))
    }
}

/// On-disk layout. Arrays include node 0 first when `edge_server` is set.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub edge_server: bool,
    pub lii: Vec<Score>,
    pub lxi: Vec<Vec<Score>>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let nodes: Vec<UeId> = inst.nodes().collect();
        InstanceFile {
            n: inst.n,
            edge_server: inst.has_edge_server,
            lii: nodes.iter().map(|&id| inst.lii(id)).collect(),
            lxi: nodes
                .iter()
                .map(|&m| nodes.iter().map(|&k| inst.lxi(m, k)).collect())
                .collect(),
        }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, ModelError> {
        if self.n == 0 {
            return Err(ModelError::invalid("n", "must be at least 1"));
        }
        let width = self.n + usize::from(self.edge_server);
        if self.lii.len() != width {
            return Err(ModelError::invalid(
                "lii",
                format!("expected {width} entries, found {}", self.lii.len()),
            ));
        }
        if self.lxi.len() != width {
            return Err(ModelError::invalid(
                "lxi",
                format!("expected {width} rows, found {}", self.lxi.len()),
            ));
        }
        for (i, row) in self.lxi.iter().enumerate() {
            if row.len() != width {
                return Err(ModelError::invalid(
                    format!("lxi[{i}]"),
                    format!("expected {width} entries, found {}", row.len()),
                ));
            }
        }
        let mut inst = Instance::zeroed(self.n);
        inst.has_edge_server = self.edge_server;
        let offset = usize::from(!self.edge_server);
        for (i, v) in self.lii.into_iter().enumerate() {
            inst.lii[i + offset] = v;
        }
        for (m, row) in self.lxi.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let idx = inst.cell(m + offset, k + offset);
                inst.lxi[idx] = v;
            }
        }
        inst.validate()?;
        Ok(inst)
    }
}

/// Draws an instance with LII and LXI entries independently uniform on
/// `{0, 1, ..., 10}`.
///
/// Draw order: LII of UEs `1..=n`, then LXI row by row skipping the
/// diagonal. The edge server, when requested, is attached afterwards and
/// consumes no randomness.
pub fn generate_instance(
    n: usize,
    seed: u64,
    edge_server: Option<&EdgeServerSpec>,
) -> Result<Instance, ModelError> {
    if n == 0 {
        return Err(ModelError::Empty);
    }
    let mut rng = SeededRng::new(seed);
    let mut draw = || Score::from_int(rng.int_inclusive(0, 10));
    let lii: Vec<Score> = (0..n).map(|_| draw()).collect();
    let lxi: Vec<Vec<Score>> = (0..n)
        .map(|m| {
            (0..n)
                .map(|k| if m == k { Score::ZERO } else { draw() })
                .collect()
        })
        .collect();
    let inst = Instance::new(lii, lxi)?;
    match edge_server {
        Some(spec) => inst.attach_edge_server(spec),
        None => Ok(inst),
    }
}
