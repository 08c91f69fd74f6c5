//! JSON documents for every stored object, content hashes, and Graphviz export.
//!
//! Documents list plain vertex indices. A relation is stored as its list of
//! `[codomain, domain]` pairs; towers store both levels and bonds and are rebuilt
//! through [`Tower::push`], so every parse re-runs the bond checks.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fraisse::{BackAndForthCertificate, Digraph, Join, PeelStep, TangledTower};
use crate::graph::{canonical_path, Graph, Partition, Path};
use crate::paths::{ClassTag, Factor, PrimeFactorization};
use crate::rel::Rel;
use crate::tower::{BondMode, Tower};

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphDoc {
    pub fn of(g: &Graph) -> GraphDoc {
        GraphDoc {
            vertices: g.len(),
            edges: g.edges(),
        }
    }

    pub fn build(&self) -> Result<Arc<Graph>> {
        Graph::new(self.vertices, &self.edges).map(Arc::new)
    }
}

/// A graph written either as `{"path": n}` for the canonical path `P_n` or
/// spelled out in full.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Path { path: usize },
    Inline(GraphDoc),
}

impl GraphRef {
    pub fn of(g: &Graph) -> GraphRef {
        let n = g.len();
        if n > 0 && *g == **canonical_path(n - 1).graph() {
            GraphRef::Path { path: n - 1 }
        } else {
            GraphRef::Inline(GraphDoc::of(g))
        }
    }

    pub fn build(&self) -> Result<Arc<Graph>> {
        match self {
            GraphRef::Path { path } => Ok(canonical_path(*path).graph().clone()),
            GraphRef::Inline(doc) => doc.build(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelDoc {
    pub dom: GraphRef,
    pub cod: GraphRef,
    /// Pairs `[y, x]` with `y` in the codomain related to `x` in the domain.
    pub pairs: Vec<(usize, usize)>,
}

impl RelDoc {
    pub fn of(r: &Rel) -> RelDoc {
        RelDoc {
            dom: GraphRef::of(r.dom()),
            cod: GraphRef::of(r.cod()),
            pairs: r.pairs(),
        }
    }

    pub fn build(&self) -> Result<Rel> {
        Rel::from_pairs(self.dom.build()?, self.cod.build()?, self.pairs.iter().copied())
    }

    /// Builds over given graphs after checking they match the stored ones.
    fn build_on(&self, dom: &Arc<Graph>, cod: &Arc<Graph>) -> Result<Rel> {
        if *self.dom.build()? != **dom || *self.cod.build()? != **cod {
            return Err(Error::Parse("relation graphs do not match their context".into()));
        }
        Rel::from_pairs(dom.clone(), cod.clone(), self.pairs.iter().copied())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub depth: usize,
    pub mode: BondMode,
    pub levels: Vec<GraphDoc>,
    /// `bonds[k]` goes from level `k + 1` onto level `k`.
    pub bonds: Vec<RelDoc>,
}

impl TowerDoc {
    pub fn of(t: &Tower) -> TowerDoc {
        TowerDoc {
            depth: t.depth(),
            mode: t.mode(),
            levels: t.levels().iter().map(|g| GraphDoc::of(g)).collect(),
            bonds: t.bonds().iter().map(RelDoc::of).collect(),
        }
    }

    pub fn build(&self) -> Result<Tower> {
        if self.levels.len() != self.depth + 1 || self.bonds.len() != self.depth {
            return Err(Error::Parse("tower depth stamp does not match its levels".into()));
        }
        let mut t = Tower::root(self.levels[0].build()?, self.mode);
        for (k, b) in self.bonds.iter().enumerate() {
            let dom = self.levels[k + 1].build()?;
            let bond = b.build_on(&dom, &t.levels()[k].clone())?;
            t.push(bond)?;
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangledTowerDoc {
    pub tower: TowerDoc,
    pub tangle_witnesses: Vec<usize>,
}

impl TangledTowerDoc {
    pub fn of(t: &TangledTower) -> TangledTowerDoc {
        TangledTowerDoc {
            tower: TowerDoc::of(t.tower()),
            tangle_witnesses: t.tangle_witnesses().to_vec(),
        }
    }

    pub fn build(&self) -> Result<TangledTower> {
        let t = TangledTower::new(self.tower.build()?)?;
        if t.tangle_witnesses() != self.tangle_witnesses.as_slice() {
            return Err(Error::Parse("stored tangle witnesses differ from the recomputed ones".into()));
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub depth_p: usize,
    pub depth_q: usize,
    pub p_levels: Vec<usize>,
    pub q_levels: Vec<usize>,
    pub forward: Vec<RelDoc>,
    pub backward: Vec<RelDoc>,
    /// Content hashes of the two towers the certificate was verified against.
    pub p_hash: String,
    pub q_hash: String,
}

impl CertificateDoc {
    pub fn of(c: &BackAndForthCertificate, p_hash: String, q_hash: String) -> CertificateDoc {
        CertificateDoc {
            depth_p: c.depth_p,
            depth_q: c.depth_q,
            p_levels: c.p_levels.clone(),
            q_levels: c.q_levels.clone(),
            forward: c.forward.iter().map(RelDoc::of).collect(),
            backward: c.backward.iter().map(RelDoc::of).collect(),
            p_hash,
            q_hash,
        }
    }

    pub fn build(&self) -> Result<BackAndForthCertificate> {
        Ok(BackAndForthCertificate {
            forward: self.forward.iter().map(RelDoc::build).collect::<Result<_>>()?,
            backward: self.backward.iter().map(RelDoc::build).collect::<Result<_>>()?,
            p_levels: self.p_levels.clone(),
            q_levels: self.q_levels.clone(),
            depth_p: self.depth_p,
            depth_q: self.depth_q,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigraphDoc {
    pub path: GraphDoc,
    /// Pairs `(y, x)`: `y` is related to `x`.
    pub pairs: Vec<(usize, usize)>,
}

impl DigraphDoc {
    pub fn of(d: &Digraph) -> DigraphDoc {
        DigraphDoc {
            path: GraphDoc::of(d.path().graph()),
            pairs: d.rel().pairs(),
        }
    }

    pub fn build(&self) -> Result<Digraph> {
        let g = self.path.build()?;
        let rel = Rel::from_pairs(g.clone(), g.clone(), self.pairs.iter().copied())?;
        Digraph::new(Path::new(g)?, rel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub base: GraphDoc,
    pub blocks: Vec<Vec<usize>>,
}

impl PartitionDoc {
    pub fn of(p: &Partition) -> PartitionDoc {
        PartitionDoc {
            base: GraphDoc::of(p.base()),
            blocks: p.blocks().to_vec(),
        }
    }

    pub fn build(&self) -> Result<Partition> {
        Partition::new(self.base.build()?, self.blocks.clone())
    }
}

/// A join together with the two digraphs it joins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinDoc {
    pub a: DigraphDoc,
    pub b: DigraphDoc,
    /// Morphism from the joined path onto the path of `a`.
    pub f: RelDoc,
    /// Morphism from the joined path onto the path of `b`.
    pub g: RelDoc,
    pub c: DigraphDoc,
}

impl JoinDoc {
    pub fn of(a: &Digraph, b: &Digraph, j: &Join) -> JoinDoc {
        JoinDoc {
            a: DigraphDoc::of(a),
            b: DigraphDoc::of(b),
            f: RelDoc::of(&j.f),
            g: RelDoc::of(&j.g),
            c: DigraphDoc::of(&j.c),
        }
    }

    pub fn build(&self) -> Result<(Digraph, Digraph, Join)> {
        let join = Join {
            f: self.f.build()?,
            g: self.g.build()?,
            c: self.c.build()?,
        };
        Ok((self.a.build()?, self.b.build()?, join))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub tag: ClassTag,
    pub rel: RelDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    /// The decomposed function.
    pub source: RelDoc,
    /// Outermost first.
    pub factors: Vec<FactorDoc>,
}

impl DecompositionDoc {
    pub fn of(source: &Rel, p: &PrimeFactorization) -> DecompositionDoc {
        DecompositionDoc {
            source: RelDoc::of(source),
            factors: p
                .factors
                .iter()
                .map(|f| FactorDoc {
                    tag: f.tag,
                    rel: RelDoc::of(&f.rel),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<(Rel, PrimeFactorization)> {
        let p = PrimeFactorization {
            factors: self
                .factors
                .iter()
                .map(|f| Ok(Factor { tag: f.tag, rel: f.rel.build()? }))
                .collect::<Result<_>>()?,
        };
        Ok((self.source.build()?, p))
    }
}

/// An end-moving partition of the domain of `morphism` for `vertex`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndMoveDoc {
    pub morphism: RelDoc,
    pub vertex: usize,
    pub partition: PartitionDoc,
    /// Windows chosen while building, as domain position intervals.
    pub windows: Vec<(usize, usize)>,
}

/// `m` with `factor ∘ m ⊆ target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubfactorDoc {
    /// Registered name of the construction used.
    pub strategy: String,
    pub factor: RelDoc,
    pub target: RelDoc,
    pub m: RelDoc,
}

/// `rel` from level `result_level` with `input ∘ rel ⊆ ≥^level_result_level`
/// in the tangled tower whose content hash is `tower_hash`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionDoc {
    pub tower_hash: String,
    pub level: usize,
    pub input: RelDoc,
    pub result_level: usize,
    pub rel: RelDoc,
    pub steps: Vec<PeelStep>,
}

/// Any stored object, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Object {
    Graph(GraphDoc),
    Relation(RelDoc),
    Tower(TowerDoc),
    TangledTower(TangledTowerDoc),
    Certificate(CertificateDoc),
    Digraph(DigraphDoc),
    Partition(PartitionDoc),
    Join(JoinDoc),
    Decomposition(DecompositionDoc),
    EndMove(EndMoveDoc),
    Subfactor(SubfactorDoc),
    Absorption(AbsorptionDoc),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Graph(_) => "graph",
            Object::Relation(_) => "relation",
            Object::Tower(_) => "tower",
            Object::TangledTower(_) => "tangled_tower",
            Object::Certificate(_) => "certificate",
            Object::Digraph(_) => "digraph",
            Object::Partition(_) => "partition",
            Object::Join(_) => "join",
            Object::Decomposition(_) => "decomposition",
            Object::EndMove(_) => "end_move",
            Object::Subfactor(_) => "subfactor",
            Object::Absorption(_) => "absorption",
        }
    }

    /// Pretty JSON with a trailing newline; field order follows the type definitions.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Object> {
        serde_json::from_str(text).map_err(parse_err)
    }

    /// SHA-256 of the compact JSON encoding, in hex.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("documents serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// Undirected DOT for a graph.
pub fn graph_dot(g: &Graph, name: &str) -> String {
    let mut out = format!("graph {} {{\n", quote(name));
    for v in 0..g.len() {
        let _ = writeln!(out, "  {v};");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "  {a} -- {b};");
    }
    out.push_str("}\n");
    out
}

/// Bipartite DOT for a relation: domain on the left, codomain on the right,
/// an arrow from each domain vertex to each vertex of its image.
pub fn relation_dot(r: &Rel) -> String {
    let mut out = String::from("digraph \"relation\" {\n  rankdir=LR;\n");
    for (side, g) in [("d", r.dom()), ("c", r.cod())] {
        let _ = writeln!(out, "  subgraph \"cluster_{side}\" {{");
        for v in 0..g.len() {
            let _ = writeln!(out, "    {side}{v} [label=\"{v}\"];");
        }
        for (a, b) in g.edges() {
            let _ = writeln!(out, "    {side}{a} -> {side}{b} [dir=none, style=dashed];");
        }
        out.push_str("  }\n");
    }
    for (y, x) in r.pairs() {
        let _ = writeln!(out, "  d{x} -> c{y};");
    }
    out.push_str("}\n");
    out
}

/// Layered DOT for a tower: one rank per level, level 0 at the top, bond
/// arrows pointing from each vertex up to the vertices above it.
pub fn tower_dot(t: &Tower) -> String {
    let mut out = String::from("digraph \"tower\" {\n  rankdir=BT;\n");
    for (k, g) in t.levels().iter().enumerate() {
        let _ = writeln!(out, "  subgraph \"level_{k}\" {{\n    rank=same;");
        for v in 0..g.len() {
            let _ = writeln!(out, "    l{k}_{v} [label=\"{v}\"];");
        }
        for (a, b) in g.edges() {
            let _ = writeln!(out, "    l{k}_{a} -> l{k}_{b} [dir=none];");
        }
        out.push_str("  }\n");
    }
    for (k, b) in t.bonds().iter().enumerate() {
        for (y, x) in b.pairs() {
            let _ = writeln!(out, "  l{}_{x} -> l{k}_{y} [color=gray];", k + 1);
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::{back_and_forth, generate_tangled_tower, random_digraph};
    use crate::paths::{build_tangled, decompose_in_f, path};
    use crate::graph::canonical_path;

    fn round_trip(o: &Object) {
        let text = o.to_json();
        let back = Object::from_json(&text).unwrap();
        assert_eq!(&back, o);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.content_hash(), o.content_hash());
    }

    #[test]
    fn documents_round_trip() {
        let t = generate_tangled_tower(2, 1, 3).unwrap();
        let rel = build_tangled(&canonical_path(2), 1).unwrap();
        let d = random_digraph(2, 4).unwrap();
        let f = Rel::from_function(path(4), path(2), &[0, 1, 2, 1, 2]).unwrap();
        let objects = [
            Object::Graph(GraphDoc::of(&path(3))),
            Object::Relation(RelDoc::of(&rel)),
            Object::Tower(TowerDoc::of(t.tower())),
            Object::TangledTower(TangledTowerDoc::of(&t)),
            Object::Digraph(DigraphDoc::of(&d)),
            Object::Decomposition(DecompositionDoc::of(&f, &decompose_in_f(&f).unwrap())),
        ];
        for o in &objects {
            round_trip(o);
        }
    }

    #[test]
    fn rebuilt_objects_are_equal() {
        let t = generate_tangled_tower(3, 1, 3).unwrap();
        assert_eq!(TangledTowerDoc::of(&t).build().unwrap(), t);
        let cert = back_and_forth(&t, &t, 1).map_err(|e| e.0).unwrap();
        let doc = CertificateDoc::of(&cert, "p".into(), "q".into());
        assert_eq!(doc.build().unwrap(), cert);
        let d = random_digraph(3, 9).unwrap();
        assert_eq!(DigraphDoc::of(&d).build().unwrap(), d);
        let f = Rel::from_function(path(4), path(2), &[0, 1, 2, 1, 2]).unwrap();
        let p = decompose_in_f(&f).unwrap();
        assert_eq!(DecompositionDoc::of(&f, &p).build().unwrap(), (f, p));
    }

    #[test]
    fn tampered_documents_fail() {
        let t = generate_tangled_tower(1, 1, 3).unwrap();
        let mut doc = TowerDoc::of(t.tower());
        doc.depth = 2;
        assert!(doc.build().is_err());
        let mut doc = TowerDoc::of(t.tower());
        // drop every pair at domain vertex 0, leaving it unrelated
        doc.bonds[0].pairs.retain(|&(_, x)| x != 0);
        assert!(doc.build().is_err());
        assert!(matches!(Object::from_json("{\"kind\":\"spiral\"}"), Err(Error::Parse(_))));
    }

    #[test]
    fn construction_documents_round_trip() {
        let t = build_tangled(&canonical_path(2), 1).unwrap();
        let s = crate::paths::make_simple(2, 1, crate::paths::SimpleVariant::Weak).unwrap();
        let m = crate::paths::proper_simple_subfactor(&s, &t).unwrap();
        let sub = Object::Subfactor(SubfactorDoc {
            strategy: "simple".into(),
            factor: RelDoc::of(&s),
            target: RelDoc::of(&t),
            m: RelDoc::of(&m),
        });
        let (part, report) = crate::fraisse::end_move_with_report(&t, 3).unwrap();
        let em = Object::EndMove(EndMoveDoc {
            morphism: RelDoc::of(&t),
            vertex: 3,
            partition: PartitionDoc::of(&part),
            windows: report.windows,
        });
        let tower = generate_tangled_tower(2, 1, 3).unwrap();
        let id = Rel::identity(tower.tower().levels()[1].clone());
        let a = crate::fraisse::subabsorb(&tower, 1, &id).unwrap();
        let ab = Object::Absorption(AbsorptionDoc {
            tower_hash: "h".into(),
            level: 1,
            input: RelDoc::of(&id),
            result_level: a.level,
            rel: RelDoc::of(&a.rel),
            steps: a.steps,
        });
        let (x, y) = (random_digraph(2, 1).unwrap(), random_digraph(1, 2).unwrap());
        let join = crate::fraisse::digraph_join(&x, &y).unwrap();
        let j = Object::Join(JoinDoc::of(&x, &y, &join));
        for o in [sub, em, ab, j] {
            round_trip(&o);
        }
    }

    #[test]
    fn relation_wire_format() {
        let r = Rel::from_function(path(2), path(1), &[0, 1, 1]).unwrap();
        let json = serde_json::to_value(RelDoc::of(&r)).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"dom": {"path": 2}, "cod": {"path": 1}, "pairs": [[0, 0], [1, 1], [1, 2]]})
        );
        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let doc = RelDoc::of(&Rel::identity(Arc::new(star)));
        assert!(matches!(doc.dom, GraphRef::Inline(_)));
        assert_eq!(RelDoc::of(&doc.build().unwrap()), doc);
    }

    #[test]
    fn hashes_separate_objects() {
        let a = Object::Graph(GraphDoc::of(&path(2)));
        let b = Object::Graph(GraphDoc::of(&path(3)));
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }

    #[test]
    fn dot_shapes() {
        let t = generate_tangled_tower(1, 1, 0).unwrap();
        let dot = tower_dot(t.tower());
        assert!(dot.starts_with("digraph") && dot.contains("level_1") && dot.contains("l1_0 -> l0_"));
        let r = relation_dot(&t.tower().bonds()[0]);
        assert_eq!(r.lines().filter(|l| l.starts_with("  d")).count(), t.tower().bonds()[0].pair_count());
        assert_eq!(graph_dot(&path(2), "p").matches("--").count(), 2);
    }
}
