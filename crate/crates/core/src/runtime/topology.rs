use crate::metamodel::{Direction, ModifierKind, QualifiedName, SystemModel};

/// (module index, line index)
pub(crate) type Port = (usize, usize);

#[derive(Debug, Clone)]
pub(crate) struct ModuleInfo {
    pub name: String,
    pub layer: u32,
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
}

impl ModuleInfo {
    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|(n, _)| n == name)
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|(n, _)| n == name)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ModifierInfo {
    pub kind: ModifierKind,
    pub target: Port,
    pub control: Port,
    pub time_ms: u64,
    /// `suppressor turn.heading`
    pub label: String,
}

/// Static routing tables of a valid model.
#[derive(Debug, Clone)]
pub(crate) struct Topology {
    pub modules: Vec<ModuleInfo>,
    pub modifiers: Vec<ModifierInfo>,
    /// Sinks of each output, in wire declaration order.
    pub wires: Vec<Vec<Vec<Port>>>,
    /// Modifiers controlled by each output.
    pub controls: Vec<Vec<Vec<usize>>>,
    /// Inhibitor on each output.
    pub inhibitor: Vec<Vec<Option<usize>>>,
    /// Suppressor on each input.
    pub suppressor: Vec<Vec<Option<usize>>>,
    /// Module indices ordered by (layer, declaration index).
    pub dispatch_order: Vec<usize>,
}

impl Topology {
    /// Builds the tables. The model must be valid.
    pub fn new(model: &SystemModel) -> Self {
        let modules: Vec<ModuleInfo> = model
            .modules
            .iter()
            .map(|m| ModuleInfo {
                name: m.name.clone(),
                layer: m.layer,
                inputs: m
                    .inputs
                    .iter()
                    .map(|l| (l.name.clone(), l.data_type.clone()))
                    .collect(),
                outputs: m
                    .outputs
                    .iter()
                    .map(|l| (l.name.clone(), l.data_type.clone()))
                    .collect(),
            })
            .collect();

        let mut wires: Vec<Vec<Vec<Port>>> = modules
            .iter()
            .map(|m| vec![Vec::new(); m.outputs.len()])
            .collect();
        let mut controls: Vec<Vec<Vec<usize>>> = wires.iter().map(|o| vec![Vec::new(); o.len()]).collect();
        let mut inhibitor: Vec<Vec<Option<usize>>> =
            wires.iter().map(|o| vec![None; o.len()]).collect();
        let mut suppressor: Vec<Vec<Option<usize>>> = modules
            .iter()
            .map(|m| vec![None; m.inputs.len()])
            .collect();

        let port = |q: &QualifiedName, dir: Direction| -> Port {
            let r = model
                .resolve(q)
                .filter(|r| r.direction == dir)
                .unwrap_or_else(|| panic!("unresolved {dir} line `{q}` in a validated model"));
            (r.module, r.index)
        };

        for w in &model.wires {
            let (sm, so) = port(&w.source, Direction::Output);
            wires[sm][so].push(port(&w.sink, Direction::Input));
        }

        let mut modifiers = Vec::new();
        for (i, m) in model.modifiers.iter().enumerate() {
            let control = port(&m.controlled_by, Direction::Output);
            let target = match m.kind {
                ModifierKind::Suppressor => {
                    let p = port(&m.target, Direction::Input);
                    suppressor[p.0][p.1] = Some(i);
                    p
                }
                ModifierKind::Inhibitor => {
                    let p = port(&m.target, Direction::Output);
                    inhibitor[p.0][p.1] = Some(i);
                    p
                }
            };
            controls[control.0][control.1].push(i);
            modifiers.push(ModifierInfo {
                kind: m.kind,
                target,
                control,
                time_ms: u64::try_from(m.time_ms).expect("positive time in a validated model"),
                label: format!("{} {}", m.kind, m.target),
            });
        }

        let mut dispatch_order: Vec<usize> = (0..modules.len()).collect();
        dispatch_order.sort_by_key(|&i| (modules[i].layer, i));

        Self {
            modules,
            modifiers,
            wires,
            controls,
            inhibitor,
            suppressor,
            dispatch_order,
        }
    }

    pub fn input_name(&self, (m, i): Port) -> String {
        format!("{}.{}", self.modules[m].name, self.modules[m].inputs[i].0)
    }

    pub fn output_qname(&self, (m, o): Port) -> QualifiedName {
        QualifiedName::new(
            self.modules[m].name.clone(),
            self.modules[m].outputs[o].0.clone(),
        )
    }

    pub fn find_input(&self, q: &QualifiedName) -> Option<Port> {
        let m = self.modules.iter().position(|x| x.name == q.module)?;
        Some((m, self.modules[m].input_index(&q.line)?))
    }

    pub fn find_output(&self, q: &QualifiedName) -> Option<Port> {
        let m = self.modules.iter().position(|x| x.name == q.module)?;
        Some((m, self.modules[m].output_index(&q.line)?))
    }

    /// Suppressors whose control line is `out`.
    pub fn suppressors_controlled_by(&self, out: Port) -> impl Iterator<Item = usize> + '_ {
        self.controls[out.0][out.1]
            .iter()
            .copied()
            .filter(|&i| self.modifiers[i].kind == ModifierKind::Suppressor)
    }
}
