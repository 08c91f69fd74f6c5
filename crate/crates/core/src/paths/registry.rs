//! Subfactor constructions behind a common trait, looked up by name at run
//! time. The CLI's `--kind` flag and the subabsorption loop both go through
//! here, so a new construction only needs registering.

use std::sync::OnceLock;

use super::{
    canon_morphism, classify, e, hook_subfactor, improper_simple_subfactor_of,
    proper_simple_subfactor, snake_subfactor, ClassTag,
};
use crate::error::{domain, Result};
use crate::rel::{check_morphism, Rel};

pub trait SubfactorStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether `factor` has the shape this construction handles.
    fn accepts(&self, factor: &Rel) -> bool;

    /// `m` with `factor ∘ m ⊆ target`.
    fn subfactor(&self, factor: &Rel, target: &Rel) -> Result<Rel>;
}

fn tag(f: &Rel) -> Option<ClassTag> {
    classify(f).ok().map(|c| c.tag)
}

/// Co-bijective, edge-preserving and one edge shorter on the codomain side.
fn is_simple_shape(f: &Rel) -> Option<bool> {
    let c = canon_morphism(f).ok()?;
    let report = check_morphism(&c);
    (e(c.cod()) + 1 == e(c.dom())).then_some(report.proper == Some(true))
}

struct Snake;
struct Hook;
struct ProperSimple;
struct ImproperSimple;

impl SubfactorStrategy for Snake {
    fn name(&self) -> &'static str {
        "snake"
    }
    fn accepts(&self, f: &Rel) -> bool {
        matches!(tag(f), Some(ClassTag::ProperSnake | ClassTag::ImproperSnake))
    }
    fn subfactor(&self, f: &Rel, t: &Rel) -> Result<Rel> {
        snake_subfactor(f, t)
    }
}

impl SubfactorStrategy for Hook {
    fn name(&self) -> &'static str {
        "hook"
    }
    fn accepts(&self, f: &Rel) -> bool {
        tag(f) == Some(ClassTag::Hook) && is_simple_shape(f).is_none()
    }
    fn subfactor(&self, f: &Rel, t: &Rel) -> Result<Rel> {
        hook_subfactor(f, t)
    }
}

impl SubfactorStrategy for ProperSimple {
    fn name(&self) -> &'static str {
        "simple"
    }
    fn accepts(&self, f: &Rel) -> bool {
        is_simple_shape(f) == Some(true)
    }
    fn subfactor(&self, f: &Rel, t: &Rel) -> Result<Rel> {
        proper_simple_subfactor(f, t)
    }
}

impl SubfactorStrategy for ImproperSimple {
    fn name(&self) -> &'static str {
        "improper-simple"
    }
    fn accepts(&self, f: &Rel) -> bool {
        is_simple_shape(f) == Some(false)
    }
    fn subfactor(&self, f: &Rel, t: &Rel) -> Result<Rel> {
        improper_simple_subfactor_of(f, t)
    }
}

#[derive(Default)]
pub struct SubfactorRegistry {
    strategies: Vec<Box<dyn SubfactorStrategy>>,
}

impl SubfactorRegistry {
    /// The four built-in constructions.
    pub fn with_builtins() -> Self {
        let mut reg = Self::default();
        reg.register(Box::new(Snake));
        reg.register(Box::new(Hook));
        reg.register(Box::new(ProperSimple));
        reg.register(Box::new(ImproperSimple));
        reg
    }

    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, s: Box<dyn SubfactorStrategy>) {
        self.strategies.retain(|old| old.name() != s.name());
        self.strategies.push(s);
    }

    pub fn get(&self, name: &str) -> Option<&dyn SubfactorStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    /// First registered strategy accepting `factor`.
    pub fn find_for(&self, factor: &Rel) -> Option<&dyn SubfactorStrategy> {
        self.strategies
            .iter()
            .find(|s| s.accepts(factor))
            .map(|s| s.as_ref())
    }

    /// Runs the named strategy after checking it accepts the factor.
    pub fn run(&self, name: &str, factor: &Rel, target: &Rel) -> Result<Rel> {
        let Some(s) = self.get(name) else {
            return domain(format!(
                "unknown subfactor kind {name:?}; known: {}",
                self.names().join(", ")
            ));
        };
        if !s.accepts(factor) {
            return domain(format!("factor is not of kind {name:?}"));
        }
        s.subfactor(factor, target)
    }
}

/// Process-wide registry holding the built-ins.
pub fn registry() -> &'static SubfactorRegistry {
    static REG: OnceLock<SubfactorRegistry> = OnceLock::new();
    REG.get_or_init(SubfactorRegistry::with_builtins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_path;
    use crate::paths::{build_tangled, make_hook, make_simple, make_snake, SimpleVariant};
    use crate::rel::compose;

    #[test]
    fn dispatch_by_shape() {
        let reg = registry();
        assert_eq!(reg.names(), ["snake", "hook", "simple", "improper-simple"]);
        let pick = |f: &Rel| reg.find_for(f).map(|s| s.name());
        assert_eq!(pick(&make_snake(2, 1, 2).unwrap()), Some("snake"));
        assert_eq!(pick(&make_hook(2, 3).unwrap()), Some("hook"));
        // a hook one edge longer than its codomain folds back over an end edge
        assert_eq!(pick(&make_hook(1, 3).unwrap()), Some("improper-simple"));
        assert_eq!(pick(&make_simple(2, 1, SimpleVariant::Weak).unwrap()), Some("simple"));
        assert_eq!(
            pick(&make_simple(2, 0, SimpleVariant::Weak).unwrap()),
            Some("improper-simple")
        );
        assert_eq!(pick(&Rel::identity(crate::paths::path(2))), None);
    }

    #[test]
    fn run_checks_kind() {
        let t = build_tangled(&canonical_path(3), 0).unwrap();
        let h = make_hook(2, 3).unwrap();
        let m = registry().run("hook", &h, &t).unwrap();
        assert!(compose(&h, &m).unwrap().is_subset(&t).unwrap());
        assert!(registry().run("snake", &h, &t).is_err());
        assert!(registry().run("spiral", &h, &t).is_err());
    }

    struct Never;
    impl SubfactorStrategy for Never {
        fn name(&self) -> &'static str {
            "hook"
        }
        fn accepts(&self, _: &Rel) -> bool {
            false
        }
        fn subfactor(&self, _: &Rel, _: &Rel) -> Result<Rel> {
            unreachable!()
        }
    }

    #[test]
    fn register_replaces_by_name() {
        let mut reg = SubfactorRegistry::with_builtins();
        reg.register(Box::new(Never));
        assert_eq!(reg.names().len(), 4);
        assert!(!reg.get("hook").unwrap().accepts(&make_hook(2, 3).unwrap()));
    }
}
