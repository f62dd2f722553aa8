use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use super::{Arctan, Generator, Linear, Log, PhiKind, PowerQ, Scad};
use crate::error::{Error, Result};

/// Builds a generator from named parameters, filling in defaults.
pub type GeneratorFactory = fn(&BTreeMap<String, f64>) -> Result<Arc<dyn Generator>>;

/// Name-keyed table of generator constructors.
#[derive(Clone, Debug, Default)]
pub struct PhiRegistry {
    factories: BTreeMap<String, GeneratorFactory>,
}

static BUILTIN: LazyLock<PhiRegistry> = LazyLock::new(PhiRegistry::with_builtins);

impl PhiRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding the five built-in families.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(PhiKind::Linear.name(), Linear::from_params);
        registry.register(PhiKind::PowerQ.name(), PowerQ::from_params);
        registry.register(PhiKind::Log.name(), Log::from_params);
        registry.register(PhiKind::Arctan.name(), Arctan::from_params);
        registry.register(PhiKind::Scad.name(), Scad::from_params);
        registry
    }

    /// Shared read-only instance of [`with_builtins`](Self::with_builtins).
    pub fn builtin() -> &'static PhiRegistry {
        &BUILTIN
    }

    /// Adds or replaces a factory; returns the previous one.
    pub fn register(&mut self, name: &str, factory: GeneratorFactory) -> Option<GeneratorFactory> {
        self.factories.insert(name.to_string(), factory)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, params: &BTreeMap<String, f64>) -> Result<Arc<dyn Generator>> {
        // accept spelling variants of the built-in names
        let key = name
            .parse::<PhiKind>()
            .map(|kind| kind.name().to_string())
            .unwrap_or_else(|_| name.to_string());
        let factory = self
            .factories
            .get(&key)
            .ok_or_else(|| Error::UnknownKind(name.to_string()))?;
        factory(params)
    }
}
