use std::collections::HashMap;
use std::fmt;

use super::{Diagnostic, DiagnosticKind, Statement, Value, VisualProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Mask,
    PointCloud,
    Plane,
    Cylinder,
    Sphere,
    Skeleton,
    Face,
    Anchor,
    Direction,
    Null,
    String,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueType::Mask => "mask",
            ValueType::PointCloud => "point cloud",
            ValueType::Plane => "plane",
            ValueType::Cylinder => "cylinder",
            ValueType::Sphere => "sphere",
            ValueType::Skeleton => "skeleton",
            ValueType::Face => "face",
            ValueType::Anchor => "anchor",
            ValueType::Direction => "direction",
            ValueType::Null => "NULL",
            ValueType::String => "string",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    pub name: &'static str,
    pub accepts: &'static [ValueType],
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSignature {
    pub name: &'static str,
    pub params: &'static [Param],
    pub output: ValueType,
}

impl CellSignature {
    pub fn is_anchor_constructor(&self) -> bool {
        self.output == ValueType::Anchor
    }

    pub fn param(&self, name: &str) -> Option<&'static Param> {
        self.params.iter().find(|p| p.name.eq_ignore_ascii_case(name))
    }
}

use ValueType as T;

const fn req(name: &'static str, accepts: &'static [ValueType]) -> Param {
    Param {
        name,
        accepts,
        required: true,
    }
}

const PROMPT: &[Param] = &[req("prompt", &[T::String])];
const MASK: &[Param] = &[req("mask", &[T::Mask])];
const CLOUD: &[Param] = &[req("pointcloud", &[T::PointCloud])];
const CLOUD_DIR: &[Param] = &[
    req("pointcloud", &[T::PointCloud]),
    Param {
        name: "direction",
        accepts: &[T::Direction, T::Null],
        required: false,
    },
];

const REGISTRY: &[CellSignature] = &[
    CellSignature { name: "Text2Mask", params: PROMPT, output: T::Mask },
    CellSignature { name: "Mask2Pointcloud", params: MASK, output: T::PointCloud },
    CellSignature { name: "Pointcloud2Plane", params: CLOUD, output: T::Plane },
    CellSignature { name: "Pointcloud2Cylinder", params: CLOUD_DIR, output: T::Cylinder },
    CellSignature { name: "Pointcloud2Sphere", params: CLOUD, output: T::Sphere },
    CellSignature { name: "SkeletonExtraction", params: MASK, output: T::Skeleton },
    CellSignature { name: "Pointcloud2Skeleton", params: MASK, output: T::Skeleton },
    CellSignature { name: "FaceExtraction", params: MASK, output: T::Face },
    CellSignature { name: "Pointcloud2Face", params: MASK, output: T::Face },
    CellSignature { name: "Planar", params: &[req("plane", &[T::Plane])], output: T::Anchor },
    CellSignature { name: "Cylindrical", params: &[req("cylinder", &[T::Cylinder])], output: T::Anchor },
    CellSignature { name: "Spherical", params: &[req("sphere", &[T::Sphere])], output: T::Anchor },
];

/// Canonical names of every registered cell.
pub const CELL_NAMES: [&str; 12] = [
    "Text2Mask",
    "Mask2Pointcloud",
    "Pointcloud2Plane",
    "Pointcloud2Cylinder",
    "Pointcloud2Sphere",
    "SkeletonExtraction",
    "Pointcloud2Skeleton",
    "FaceExtraction",
    "Pointcloud2Face",
    "Planar",
    "Cylindrical",
    "Spherical",
];

/// Case-insensitive registry lookup.
pub fn cell_signature(name: &str) -> Option<&'static CellSignature> {
    REGISTRY.iter().find(|c| c.name.eq_ignore_ascii_case(name))
}

/// Type of `base.attr`, if the attribute exists.
pub(crate) fn attribute_type(base: ValueType, attr: &str) -> Option<ValueType> {
    let attr = attr.to_ascii_lowercase();
    match (base, attr.as_str()) {
        (T::Plane, "extruded") => Some(T::Plane),
        (T::Plane, "primary") => Some(T::Direction),
        (T::Skeleton | T::Face, "frontal" | "median") => Some(T::Plane),
        (T::Skeleton | T::Face, "cranial" | "anterior") => Some(T::Direction),
        _ => None,
    }
}

fn one_of(types: &[ValueType]) -> String {
    types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" or ")
}

/// Static checks: cell names, arguments, value types, attributes,
/// definition before use, unique targets, and an anchor-constructing final
/// statement. Never fails; returns every problem found.
pub fn typecheck_program(prog: &VisualProgram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    // None marks a target whose cell was unknown, to avoid cascading errors.
    let mut env: HashMap<&str, Option<ValueType>> = HashMap::new();
    let defined_at: HashMap<&str, usize> = prog
        .statements
        .iter()
        .enumerate()
        .rev()
        .map(|(i, s)| (s.target.name.as_str(), i))
        .collect();

    for (i, stmt) in prog.statements.iter().enumerate() {
        let sig = check_statement(i, stmt, &env, &defined_at, &mut diags);
        if env.contains_key(stmt.target.name.as_str()) {
            diags.push(Diagnostic::new(
                DiagnosticKind::DuplicateTarget,
                i,
                stmt.target.span,
                format!("'{}' is already defined", stmt.target.name),
            ));
            continue;
        }
        env.insert(&stmt.target.name, sig.map(|s| s.output));
    }

    if let Some(last) = prog.terminal() {
        if let Some(sig) = cell_signature(&last.cell.name) {
            if !sig.is_anchor_constructor() {
                diags.push(Diagnostic::new(
                    DiagnosticKind::NotAnchorTerminal,
                    prog.statements.len() - 1,
                    last.span,
                    format!(
                        "program must end with Planar, Cylindrical or Spherical, but ends with {}",
                        sig.name
                    ),
                ));
            }
        }
    }
    diags
}

fn check_statement(
    i: usize,
    stmt: &Statement,
    env: &HashMap<&str, Option<ValueType>>,
    defined_at: &HashMap<&str, usize>,
    diags: &mut Vec<Diagnostic>,
) -> Option<&'static CellSignature> {
    let Some(sig) = cell_signature(&stmt.cell.name) else {
        diags.push(Diagnostic::new(
            DiagnosticKind::UnknownCell,
            i,
            stmt.cell.span,
            format!("unknown cell '{}'", stmt.cell.name),
        ));
        return None;
    };

    let mut seen: Vec<&'static str> = Vec::new();
    for arg in &stmt.args {
        let Some(param) = sig.param(&arg.name.name) else {
            diags.push(Diagnostic::new(
                DiagnosticKind::UnknownArgument,
                i,
                arg.name.span,
                format!("{} has no argument '{}'", sig.name, arg.name.name),
            ));
            continue;
        };
        if seen.contains(&param.name) {
            diags.push(Diagnostic::new(
                DiagnosticKind::UnknownArgument,
                i,
                arg.name.span,
                format!("argument '{}' given twice", param.name),
            ));
            continue;
        }
        seen.push(param.name);

        let found = match &arg.value {
            Value::Str { .. } => Some(T::String),
            Value::Null { .. } => Some(T::Null),
            Value::Ref { ident, attr } => {
                match env.get(ident.name.as_str()) {
                    None => {
                        let message = match defined_at.get(ident.name.as_str()) {
                            Some(&j) if j >= i => {
                                format!("'{}' is used before its definition in statement {j}", ident.name)
                            }
                            _ => format!("'{}' is not defined", ident.name),
                        };
                        diags.push(Diagnostic::new(DiagnosticKind::UndefinedIdentifier, i, ident.span, message));
                        None
                    }
                    Some(None) => None,
                    Some(Some(base)) => match attr {
                        None => Some(*base),
                        Some(a) => match attribute_type(*base, &a.name) {
                            Some(t) => Some(t),
                            None => {
                                diags.push(Diagnostic::new(
                                    DiagnosticKind::UnknownAttribute,
                                    i,
                                    a.span,
                                    format!("{base} value '{}' has no attribute '{}'", ident.name, a.name),
                                ));
                                None
                            }
                        },
                    },
                }
            }
        };
        if let Some(found) = found {
            if !param.accepts.contains(&found) {
                diags.push(Diagnostic::new(
                    DiagnosticKind::TypeMismatch,
                    i,
                    arg.value.span(),
                    format!(
                        "argument '{}' of {} expects {}, found {found}",
                        param.name,
                        sig.name,
                        one_of(param.accepts)
                    ),
                ));
            }
        }
    }

    for p in sig.params.iter().filter(|p| p.required && !seen.contains(&p.name)) {
        if stmt.args.iter().any(|a| a.name.name.eq_ignore_ascii_case(p.name)) {
            continue;
        }
        diags.push(Diagnostic::new(
            DiagnosticKind::MissingArgument,
            i,
            stmt.cell.span,
            format!("{} requires argument '{}'", sig.name, p.name),
        ));
    }
    Some(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vpdsl::parse_program;

    fn kinds(src: &str) -> Vec<DiagnosticKind> {
        typecheck_program(&parse_program(src).unwrap())
            .into_iter()
            .map(|d| d.kind)
            .collect()
    }

    #[test]
    fn hallucinated_cell() {
        let d = typecheck_program(&parse_program("X=Linear(plane = P)").unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::UnknownCell);
        assert_eq!(d[0].span, crate::vpdsl::Span::new(2, 8));
    }

    #[test]
    fn mask_where_cylinder_expected() {
        assert_eq!(
            kinds("MASK_0=Text2Mask(prompt=\"x\")\nC=Cylindrical(cylinder = MASK_0)"),
            vec![DiagnosticKind::TypeMismatch]
        );
    }

    #[test]
    fn plane_terminal() {
        assert_eq!(
            kinds("M=Text2Mask(prompt=\"x\")\nP=Mask2Pointcloud(mask=M)\nQ=Pointcloud2Plane(pointcloud=P)"),
            vec![DiagnosticKind::NotAnchorTerminal]
        );
    }

    #[test]
    fn plane_median_is_not_an_attribute() {
        let src = "M=Text2Mask(prompt=\"x\")\nP=Mask2Pointcloud(mask=M)\nQ=Pointcloud2Plane(pointcloud=P)\nA=Planar(plane=Q.median)";
        assert_eq!(kinds(src), vec![DiagnosticKind::UnknownAttribute]);
    }

    #[test]
    fn undefined_and_forward_references() {
        let d = typecheck_program(&parse_program("A=Planar(plane = P)\nP=Pointcloud2Plane(pointcloud = Q)").unwrap());
        let k: Vec<_> = d.iter().map(|x| x.kind.clone()).collect();
        assert_eq!(
            k,
            vec![
                DiagnosticKind::UndefinedIdentifier,
                DiagnosticKind::UndefinedIdentifier,
                DiagnosticKind::NotAnchorTerminal
            ]
        );
        assert!(d[0].message.contains("before its definition"));
    }

    #[test]
    fn argument_checks() {
        assert_eq!(
            kinds("M=Text2Mask(prompt=\"x\", colour=\"red\")\nA=Planar()"),
            vec![DiagnosticKind::UnknownArgument, DiagnosticKind::MissingArgument]
        );
        assert_eq!(kinds("M=Text2Mask(prompt=\"x\", PROMPT=\"y\")\nS=Pointcloud2Sphere(pointcloud=M)\nA=Spherical(sphere=S)"),
            vec![DiagnosticKind::UnknownArgument, DiagnosticKind::TypeMismatch]);
    }

    #[test]
    fn duplicate_targets() {
        assert_eq!(
            kinds("M=Text2Mask(prompt=\"x\")\nM=Text2Mask(prompt=\"y\")\nP=Mask2Pointcloud(mask=M)\nS=Pointcloud2Sphere(pointcloud=P)\nA=Spherical(sphere=S)"),
            vec![DiagnosticKind::DuplicateTarget]
        );
    }

    #[test]
    fn cell_names_are_case_insensitive_and_aliases_resolve() {
        assert_eq!(cell_signature("pointcloud2PLANE").unwrap().name, "Pointcloud2Plane");
        assert_eq!(cell_signature("Pointcloud2Skeleton").unwrap().output, ValueType::Skeleton);
        assert_eq!(cell_signature("FaceExtraction").unwrap().output, ValueType::Face);
        for name in CELL_NAMES {
            assert!(cell_signature(name).is_some());
        }
    }

    #[test]
    fn direction_sources() {
        let src = "M=Text2Mask(prompt=\"x\")\nF=FaceExtraction(mask=M)\nP=Mask2Pointcloud(mask=M)\n\
                   Q=Pointcloud2Plane(pointcloud=P)\nC=Pointcloud2Cylinder(pointcloud=P, direction=Q.primary)\n\
                   D=Pointcloud2Cylinder(pointcloud=P, direction=F.anterior)\nE=Pointcloud2Cylinder(pointcloud=P, direction=F)\n\
                   A=Cylindrical(cylinder=C)";
        assert_eq!(kinds(src), vec![DiagnosticKind::TypeMismatch]);
    }
}
