//! Module library: named SPD modules plus the built-in primitive set.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use crate::ast::SpdModule;
use crate::diag::Diagnostic;
use crate::parser::parse_module;
use crate::primitives;
use crate::validate::validate;

/// Immutable collection of modules available to the elaborator. Primitive
/// names are reserved; an SPD module may not shadow them.
#[derive(Debug, Default, Clone)]
pub struct ModuleLibrary {
    modules: BTreeMap<String, SpdModule>,
}

impl ModuleLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, module: SpdModule) -> Result<(), Diagnostic> {
        if primitives::is_primitive(&module.name) {
            return Err(Diagnostic::new(format!(
                "module name '{}' shadows a library primitive",
                module.name
            )));
        }
        if self.modules.contains_key(&module.name) {
            return Err(Diagnostic::new(format!(
                "duplicate module '{}' in library",
                module.name
            )));
        }
        self.modules.insert(module.name.clone(), module);
        Ok(())
    }

    /// Parse, validate, and add one SPD source.
    pub fn add_source(&mut self, source: &str) -> Result<&SpdModule, Diagnostic> {
        let module = parse_module(source)?;
        let diags = validate(&module);
        if let Some(d) = diags.first() {
            return Err(Diagnostic {
                line: d.line,
                message: format!("module '{}': {}", module.name, d.message),
            });
        }
        let name = module.name.clone();
        self.add(module)?;
        Ok(&self.modules[&name])
    }

    pub fn get(&self, name: &str) -> Option<&SpdModule> {
        self.modules.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.modules.keys().map(|s| s.as_str())
    }

    pub fn is_primitive(&self, name: &str) -> bool {
        primitives::is_primitive(name)
    }
}
