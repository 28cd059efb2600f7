use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Label, StatementType};

/// Statement rewrite permissions. `AssumeToSkip` is off unless enabled explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpdateSchema {
    Id,
    AssignToAssign,
    AssignToSkip,
    AssumeToAssume,
    CallToCall,
    CallToSkip,
    AssumeToSkip,
}

impl UpdateSchema {
    pub const ALL: [UpdateSchema; 7] = [
        UpdateSchema::Id,
        UpdateSchema::AssignToAssign,
        UpdateSchema::AssignToSkip,
        UpdateSchema::AssumeToAssume,
        UpdateSchema::CallToCall,
        UpdateSchema::CallToSkip,
        UpdateSchema::AssumeToSkip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UpdateSchema::Id => "id",
            UpdateSchema::AssignToAssign => "assign->assign",
            UpdateSchema::AssignToSkip => "assign->skip",
            UpdateSchema::AssumeToAssume => "assume->assume",
            UpdateSchema::CallToCall => "call->call",
            UpdateSchema::CallToSkip => "call->skip",
            UpdateSchema::AssumeToSkip => "assume->skip",
        }
    }

    /// Short identifier usable inside solver symbols.
    pub fn tag(self) -> &'static str {
        match self {
            UpdateSchema::Id => "id",
            UpdateSchema::AssignToAssign => "asg",
            UpdateSchema::AssignToSkip => "asgskip",
            UpdateSchema::AssumeToAssume => "asm",
            UpdateSchema::CallToCall => "call",
            UpdateSchema::CallToSkip => "callskip",
            UpdateSchema::AssumeToSkip => "asmskip",
        }
    }

    /// Statement type the schema rewrites; `None` for `id`, which applies everywhere.
    pub fn source(self) -> Option<StatementType> {
        match self {
            UpdateSchema::Id => None,
            UpdateSchema::AssignToAssign | UpdateSchema::AssignToSkip => Some(StatementType::Assign),
            UpdateSchema::AssumeToAssume | UpdateSchema::AssumeToSkip => Some(StatementType::Assume),
            UpdateSchema::CallToCall | UpdateSchema::CallToSkip => Some(StatementType::Call),
        }
    }
}

impl fmt::Display for UpdateSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown update schema '{0}'")]
pub struct UnknownSchema(pub String);

impl FromStr for UpdateSchema {
    type Err = UnknownSchema;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let norm = norm.replace('→', "->").replace("_to_", "->");
        UpdateSchema::ALL
            .into_iter()
            .find(|u| u.name() == norm)
            .ok_or_else(|| UnknownSchema(s.to_string()))
    }
}

impl Serialize for UpdateSchema {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for UpdateSchema {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Schemas among `enabled` that apply to a statement of type `ty`; `id` is always included.
pub fn applicable_schemas(ty: StatementType, enabled: &BTreeSet<UpdateSchema>) -> Vec<UpdateSchema> {
    UpdateSchema::ALL
        .into_iter()
        .filter(|u| *u == UpdateSchema::Id || (enabled.contains(u) && u.source() == Some(ty)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostOverride {
    pub label: String,
    pub schema: UpdateSchema,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostModelError {
    #[error("invalid cost model: {0}")]
    Json(String),
    #[error("the identity update always costs 0")]
    NonzeroIdentity,
}

/// Costs of applying each schema at each location, plus the budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub default_costs: BTreeMap<UpdateSchema, u32>,
    pub overrides: Vec<CostOverride>,
    pub budget: u32,
    pub disabled_schemas: BTreeSet<UpdateSchema>,
}

impl Default for CostModel {
    /// Cost 1 for every schema other than `id`; `assume->skip` disabled.
    fn default() -> Self {
        CostModel::uniform(1, 0)
    }
}

impl CostModel {
    pub fn uniform(cost: u32, budget: u32) -> Self {
        CostModel {
            default_costs: UpdateSchema::ALL
                .into_iter()
                .filter(|u| *u != UpdateSchema::Id)
                .map(|u| (u, cost))
                .collect(),
            overrides: Vec::new(),
            budget,
            disabled_schemas: BTreeSet::from([UpdateSchema::AssumeToSkip]),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CostModelError> {
        let m: CostModel = serde_json::from_str(text).map_err(|e| CostModelError::Json(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<(), CostModelError> {
        let id_cost = self.default_costs.get(&UpdateSchema::Id).copied().unwrap_or(0);
        let id_override = self
            .overrides
            .iter()
            .any(|o| o.schema == UpdateSchema::Id && o.cost != 0);
        if id_cost != 0 || id_override {
            return Err(CostModelError::NonzeroIdentity);
        }
        Ok(())
    }

    pub fn enabled(&self) -> BTreeSet<UpdateSchema> {
        UpdateSchema::ALL
            .into_iter()
            .filter(|u| !self.disabled_schemas.contains(u))
            .collect()
    }

    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    pub fn enable_only(mut self, schemas: &[UpdateSchema]) -> Self {
        self.disabled_schemas = UpdateSchema::ALL
            .into_iter()
            .filter(|u| *u != UpdateSchema::Id && !schemas.contains(u))
            .collect();
        self
    }

    /// `c(u, l)`; overrides match the qualified location name (`label` in
    /// `main`, `proc.label` elsewhere). Schemas without a default cost 1.
    pub fn cost(&self, schema: UpdateSchema, location: &str) -> u32 {
        if schema == UpdateSchema::Id {
            return 0;
        }
        self.overrides
            .iter()
            .rev()
            .find(|o| o.schema == schema && o.label == location)
            .map(|o| o.cost)
            .unwrap_or_else(|| self.default_costs.get(&schema).copied().unwrap_or(1))
    }

    pub fn cost_at(&self, schema: UpdateSchema, label: &Label) -> u32 {
        self.cost(schema, label.as_str())
    }
}
