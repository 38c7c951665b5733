use strata_core::vpdsl::{parse_program, typecheck_program, validate_program, DiagnosticKind, CORPUS};

#[test]
fn every_corpus_program_validates() {
    assert_eq!(CORPUS.len(), 16);
    for p in CORPUS {
        let prog = validate_program(p.source).unwrap_or_else(|d| panic!("program {}: {d:?}", p.number));
        let last = prog.terminal().unwrap();
        assert!(["Planar", "Cylindrical", "Spherical"].iter().any(|c| c.eq_ignore_ascii_case(&last.cell.name)));
    }
}

#[test]
fn first_program_shape() {
    let prog = parse_program(CORPUS[0].source).unwrap();
    assert_eq!(prog.statements.len(), 4);
    let cells: Vec<_> = prog.statements.iter().map(|s| s.cell.name.as_str()).collect();
    assert_eq!(cells, ["Text2Mask", "Mask2Pointcloud", "Pointcloud2Cylinder", "Cylindrical"]);
}

#[test]
fn unnormalized_spellings_are_undefined_identifiers() {
    let mut normalized = Vec::new();
    for p in CORPUS {
        if !p.normalized() {
            continue;
        }
        normalized.push(p.number);
        let diags = validate_program(p.raw).unwrap_err();
        assert!(diags.iter().all(|d| d.kind == DiagnosticKind::UndefinedIdentifier), "{}: {diags:?}", p.number);
        for d in &diags {
            assert!(d.span.end <= p.raw.len());
        }
    }
    assert_eq!(normalized, [6, 10, 12, 13]);
}

#[test]
fn hallucinated_cell_is_unknown() {
    let src = CORPUS[2].source.replace("Planar(", "Linear(");
    let diags = validate_program(&src).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].kind, DiagnosticKind::UnknownCell);
    assert_eq!(&src[diags[0].span.start..diags[0].span.end], "Linear");
    assert_eq!(diags[0].statement, 3);
}

#[test]
fn plane_terminal_is_rejected() {
    let src: Vec<&str> = CORPUS[7].source.lines().take(3).collect();
    let diags = validate_program(&src.join("\n")).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].kind, DiagnosticKind::NotAnchorTerminal);
    assert_eq!(diags[0].statement, 2);
}

#[test]
fn corpus_round_trips_through_diagnostic_free_typecheck_after_reparse() {
    for p in CORPUS {
        let prog = parse_program(p.source).unwrap();
        assert!(typecheck_program(&prog).is_empty());
        assert_eq!(prog.source, p.source);
    }
}
