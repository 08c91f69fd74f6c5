//! Re-verification of stored objects. `check` prints these reports, and every
//! `construct` runs the same check on its output before storing it.

use clap::ValueEnum;
use serde_json::{json, Value};

use pseudoarc_core::fraisse::{
    end_move_report, is_strictly_connected, verify_certificate, Digraph, Join, TangledTower,
};
use pseudoarc_core::io::{AbsorptionDoc, CertificateDoc, Object};
use pseudoarc_core::paths::{classify, ClassTag};
use pseudoarc_core::rel::is_edge_witnessing;
use pseudoarc_core::{check_morphism, compose, is_tangled, Rel};

use crate::fail::Failure;
use crate::store::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Predicate {
    /// Co-bijective and edge-preserving; prints the full report.
    Morphism,
    Tangled,
    EdgeWitnessing,
    /// A tower or tangled tower rebuilds and validates.
    Tower,
    /// A back-and-forth certificate against its two towers.
    Certificate,
    Digraph,
    Join,
    Decomposition,
    EndMove,
    Subfactor,
    Subabsorb,
    /// Whatever check fits the object's kind.
    Object,
}

pub struct Verdict {
    pub pass: bool,
    pub report: Value,
}

fn verdict(pass: bool, report: Value) -> Verdict {
    Verdict { pass, report }
}

fn wrong_kind(p: Predicate, obj: &Object) -> Failure {
    Failure::Usage(format!("predicate {p:?} does not apply to a {} object", obj.kind()))
}

fn relation(obj: &Object, p: Predicate) -> Result<Rel, Failure> {
    match obj {
        Object::Relation(doc) => Ok(doc.build()?),
        other => Err(wrong_kind(p, other)),
    }
}

/// The predicate `check object` picks for each kind.
fn default_predicate(obj: &Object) -> Predicate {
    match obj {
        Object::Relation(_) => Predicate::Morphism,
        Object::Graph(_) | Object::Partition(_) => Predicate::Object,
        Object::Tower(_) | Object::TangledTower(_) => Predicate::Tower,
        Object::Certificate(_) => Predicate::Certificate,
        Object::Digraph(_) => Predicate::Digraph,
        Object::Join(_) => Predicate::Join,
        Object::Decomposition(_) => Predicate::Decomposition,
        Object::EndMove(_) => Predicate::EndMove,
        Object::Subfactor(_) => Predicate::Subfactor,
        Object::Absorption(_) => Predicate::Subabsorb,
    }
}

/// Runs `p` on `obj`; `context` supplies towers for certificates and
/// absorptions, otherwise they are looked up in the workspace by hash.
pub fn run(p: Predicate, obj: &Object, context: &[Object], ws: &Workspace) -> Result<Verdict, Failure> {
    let p = if p == Predicate::Object { default_predicate(obj) } else { p };
    match p {
        Predicate::Morphism => {
            let r = check_morphism(&relation(obj, p)?);
            Ok(verdict(r.is_morphism(), serde_json::to_value(&r).expect("report serializes")))
        }
        Predicate::Tangled => {
            let t = is_tangled(&relation(obj, p)?)?;
            Ok(verdict(t, json!({ "tangled": t })))
        }
        Predicate::EdgeWitnessing => {
            let w = is_edge_witnessing(&relation(obj, p)?);
            Ok(verdict(w, json!({ "edge_witnessing": w })))
        }
        Predicate::Tower => tower(obj),
        Predicate::Certificate => match obj {
            Object::Certificate(doc) => certificate(doc, context, ws),
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Digraph => match obj {
            Object::Digraph(doc) => {
                let d = doc.build()?;
                Ok(verdict(true, json!({ "digraph": true, "strict": d.is_strict() })))
            }
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Join => match obj {
            Object::Join(doc) => {
                let (a, b, j) = doc.build()?;
                join(&a, &b, &j)
            }
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Decomposition => match obj {
            Object::Decomposition(doc) => {
                let (source, fz) = doc.build()?;
                let tags: Vec<ClassTag> = fz.factors.iter().map(|f| f.tag).collect();
                let lone_iso = tags == [ClassTag::Isomorphism];
                let prime = lone_iso
                    || tags
                        .iter()
                        .all(|t| matches!(t, ClassTag::Simple | ClassTag::Hook | ClassTag::ProperSnake));
                let mut tags_match = true;
                for f in &fz.factors {
                    tags_match &= classify(&f.rel)?.tag == f.tag;
                }
                let canon = source.to_canonical_paths()?;
                let recomposes = match fz.recompose() {
                    None => canon == Rel::identity(canon.dom().clone()),
                    Some(r) => r? == canon,
                };
                Ok(verdict(
                    prime && tags_match && recomposes,
                    json!({ "factors": tags.len(), "prime_tags": prime, "tags_match": tags_match, "recomposes": recomposes }),
                ))
            }
            other => Err(wrong_kind(p, other)),
        },
        Predicate::EndMove => match obj {
            Object::EndMove(doc) => {
                let t = doc.morphism.build()?;
                let part = doc.partition.build()?;
                if *part.base() != *t.dom() {
                    return Err(Failure::Parse("partition is not of the morphism's domain".into()));
                }
                let r = end_move_report(&t, doc.vertex, &part)?;
                Ok(verdict(r.holds(), serde_json::to_value(&r).expect("report serializes")))
            }
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Subfactor => match obj {
            Object::Subfactor(doc) => {
                let (factor, target, m) = (doc.factor.build()?, doc.target.build()?, doc.m.build()?);
                let report = check_morphism(&m);
                let inclusion = compose(&factor, &m)?.is_subset(&target)?;
                Ok(verdict(
                    report.is_morphism() && inclusion,
                    json!({ "co_bijective": report.co_bijective, "edge_preserving": report.edge_preserving, "inclusion": inclusion }),
                ))
            }
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Subabsorb => match obj {
            Object::Absorption(doc) => absorption(doc, context, ws),
            other => Err(wrong_kind(p, other)),
        },
        Predicate::Object => match obj {
            Object::Graph(doc) => {
                doc.build()?;
                Ok(verdict(true, json!({ "valid": true })))
            }
            Object::Partition(doc) => {
                doc.build()?;
                Ok(verdict(true, json!({ "valid": true })))
            }
            _ => unreachable!("every other kind has a default predicate"),
        },
    }
}

fn tower(obj: &Object) -> Result<Verdict, Failure> {
    match obj {
        Object::Tower(doc) => {
            let t = doc.build()?;
            t.validate()?;
            Ok(verdict(true, json!({ "valid": true, "depth": t.depth() })))
        }
        Object::TangledTower(doc) => {
            // building re-checks every bond and the recorded witnesses
            let t = doc.build()?;
            t.tower().validate()?;
            let witnesses = t.verify_witnesses()?;
            Ok(verdict(
                witnesses,
                json!({ "valid": true, "depth": t.depth(), "tangled": witnesses }),
            ))
        }
        other => Err(wrong_kind(Predicate::Tower, other)),
    }
}

/// A tangled tower from the context list, or from the store by hash.
fn tower_for(hash: &str, context: Option<&Object>, ws: &Workspace) -> Result<TangledTower, Failure> {
    let obj = match context {
        Some(o) => o.clone(),
        None => match ws.find(hash)? {
            Some(path) => ws.load(path.to_str().expect("store paths are UTF-8"))?,
            None => {
                return Err(Failure::Usage(format!(
                    "tower {hash} is neither given nor in the workspace"
                )))
            }
        },
    };
    let canonical = as_tangled_tower(&obj)?;
    let actual = Object::TangledTower(pseudoarc_core::io::TangledTowerDoc::of(&canonical)).content_hash();
    if actual != hash {
        return Err(Failure::Rejected(format!("tower hash {actual} differs from the recorded {hash}")));
    }
    Ok(canonical)
}

pub fn as_tangled_tower(obj: &Object) -> Result<TangledTower, Failure> {
    match obj {
        Object::TangledTower(doc) => Ok(doc.build()?),
        Object::Tower(doc) => Ok(TangledTower::new(doc.build()?)?),
        other => Err(Failure::Usage(format!("expected a tower, got a {} object", other.kind()))),
    }
}

fn certificate(doc: &CertificateDoc, context: &[Object], ws: &Workspace) -> Result<Verdict, Failure> {
    let p = tower_for(&doc.p_hash, context.first(), ws)?;
    let q = tower_for(&doc.q_hash, context.get(1).or(context.first()), ws)?;
    let cert = doc.build()?;
    let r = verify_certificate(p.tower(), q.tower(), &cert)?;
    let mut report = serde_json::to_value(&r).expect("report serializes");
    report["rounds"] = json!(cert.backward.len());
    Ok(verdict(r.all(), report))
}

/// Morphisms, strictness of the joined digraph, and that it lies inside both
/// pullbacks.
pub fn join(a: &Digraph, b: &Digraph, j: &Join) -> Result<Verdict, Failure> {
    let (fr, gr) = (check_morphism(&j.f), check_morphism(&j.g));
    let over_c = *j.f.dom() == *j.c.path().graph() && *j.g.dom() == *j.c.path().graph();
    let onto = *j.f.cod() == *a.path().graph() && *j.g.cod() == *b.path().graph();
    if !over_c || !onto {
        return Err(Failure::Parse("join maps do not connect the three digraphs".into()));
    }
    let pull = |d: &Digraph, h: &Rel| -> Result<Rel, Failure> { Ok(compose(&h.inverse(), &compose(d.rel(), h)?)?) };
    let inside = j.c.rel().is_subset(&pull(a, &j.f)?)? && j.c.rel().is_subset(&pull(b, &j.g)?)?;
    let strict = is_strictly_connected(j.c.rel());
    let pass = fr.is_morphism() && gr.is_morphism() && strict && inside;
    Ok(verdict(
        pass,
        json!({ "f_morphism": fr.is_morphism(), "g_morphism": gr.is_morphism(), "strict": strict, "inside_pullbacks": inside, "length": j.c.path().length() }),
    ))
}

fn absorption(doc: &AbsorptionDoc, context: &[Object], ws: &Workspace) -> Result<Verdict, Failure> {
    let t = tower_for(&doc.tower_hash, context.first(), ws)?;
    let tower = t.tower();
    let (input, rel) = (doc.input.build()?, doc.rel.build()?);
    let on_levels = doc.result_level > doc.level
        && **input.cod() == **tower.level(doc.level)?
        && **rel.dom() == **tower.level(doc.result_level)?;
    if !on_levels {
        return Ok(verdict(false, json!({ "on_levels": false })));
    }
    let morphism = check_morphism(&rel).is_morphism();
    let inclusion = compose(&input, &rel)?.is_subset(tower.geq(doc.level, doc.result_level)?)?;
    Ok(verdict(
        morphism && inclusion,
        json!({ "on_levels": true, "morphism": morphism, "inclusion": inclusion }),
    ))
}
