use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use a4f_repo::*;

const CHALLENGES_MODEL: &str = "sig Node { adj: set Node }\n\npred Inv1 {\n}\n\n//SECRET\npred Spec1 {\n  no n: Node | n in n.adj\n}\n\n//SECRET\ncheck Inv1OK {\n  Inv1 iff Spec1\n} for 3\n";
const PLAIN: &str = "sig A { r: set A }\nrun {} for 2\n";

#[test]
fn secrets_get_two_links() {
    let repo = Repository::in_memory();
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let private = links.private.clone().unwrap();
    assert_ne!(links.public, private);
    assert!(token::is_token(&links.public) && token::is_token(&private));

    let plain = repo.save_shared(PLAIN, None).unwrap();
    assert!(plain.private.is_none());
}

#[test]
fn same_code_twice_is_independent() {
    let repo = Repository::in_memory();
    let a = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let b = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    assert_ne!(a, b);
    assert_ne!(
        repo.export_tree(a.private.as_ref().unwrap()).unwrap().root,
        repo.export_tree(b.private.as_ref().unwrap()).unwrap().root
    );
}

#[test]
fn public_view_hides_secret_bodies() {
    let repo = Repository::in_memory();
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let view = repo.load_by_token(&links.public).unwrap();
    assert!(view.has_secrets);
    for secret in ["no n: Node | n in n.adj", "Inv1 iff Spec1", "Spec1", "SECRET"] {
        assert!(!view.code.contains(secret), "{secret} leaked");
    }
    assert!(view.code.contains("pred Inv1"));
    assert!(view.command_index.iter().any(|c| c.name == "Inv1OK" && c.secret));

    let full = repo.load_by_token(links.private.as_ref().unwrap()).unwrap();
    assert_eq!(full.code, CHALLENGES_MODEL);
    assert!(matches!(repo.load_by_token("00000000000"), Err(RepoError::NotFound)));
}

#[test]
fn rejects_bad_code() {
    let repo = Repository::in_memory().with_max_code_bytes(64);
    assert!(matches!(repo.save_shared("sig {", None), Err(RepoError::Parse(_))));
    let big = format!("sig A {{}}\n{}", "// padding\n".repeat(10));
    assert!(matches!(repo.save_shared(&big, None), Err(RepoError::CodeTooLarge { .. })));
}

#[test]
fn executions_form_a_tree() {
    let repo = Repository::in_memory();
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let private = links.private.unwrap();
    assert_eq!(repo.export_tree(&private).unwrap().nodes.len(), 1);

    // Two sessions opened from the same link.
    let a1 = repo
        .record_execution(&links.public, None, "a1", "Inv1OK", ExecResult::Sat)
        .unwrap();
    let a2 = repo
        .record_execution(&links.public, Some(&a1), "a2", "Inv1OK", ExecResult::Sat)
        .unwrap();
    let _a3 = repo
        .record_execution(&links.public, Some(&a2), "a3", "Inv1OK", ExecResult::Unsat)
        .unwrap();
    let b1 = repo
        .record_execution(&links.public, Some(&links.public), "b1", "Inv1OK", ExecResult::Error)
        .unwrap();

    let tree = repo.export_tree(&private).unwrap();
    assert_eq!(tree.nodes.len(), 5);
    assert_eq!(tree.nodes[0].id, tree.root);
    assert_eq!(tree.nodes[0].parent, None);
    assert_eq!(tree.nodes[0].command, None);
    let by_id: BTreeMap<_, _> = tree.nodes.iter().map(|n| (n.id.clone(), n)).collect();
    assert_eq!(by_id[&a1].parent.as_deref(), Some(tree.root.as_str()));
    assert_eq!(by_id[&b1].parent.as_deref(), Some(tree.root.as_str()));
    assert_eq!(by_id[&a2].parent.as_deref(), Some(a1.as_str()));
    assert_eq!(by_id[&b1].result, Some(ExecResult::Error));
    assert!(tree.nodes.windows(2).all(|w| w[0].time <= w[1].time));
    for n in &tree.nodes {
        if let Some(p) = &n.parent {
            assert!(by_id[p].time <= n.time);
        }
        assert_eq!(n.time.len(), "2024-01-01T00:00:00.000Z".len());
        assert!(n.time.ends_with('Z'));
    }

    assert!(matches!(repo.export_tree(&links.public), Err(RepoError::Forbidden)));
    assert!(matches!(repo.export_tree("zzzzzzzzzzz"), Err(RepoError::NotFound)));
}

#[test]
fn parent_must_share_the_root() {
    let repo = Repository::in_memory();
    let a = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let b = repo.save_shared(PLAIN, None).unwrap();
    let x = repo
        .record_execution(&a.public, None, "x", "Inv1OK", ExecResult::Sat)
        .unwrap();
    assert!(matches!(
        repo.record_execution(&b.public, Some(&x), "y", "run$1", ExecResult::Sat),
        Err(RepoError::ParentMismatch(_))
    ));
    assert!(matches!(
        repo.record_execution(&a.public, Some("nope"), "y", "Inv1OK", ExecResult::Sat),
        Err(RepoError::NotFound)
    ));
}

fn sample_instance() -> serde_json::Value {
    serde_json::json!({
        "sigs": {"Node": ["Node$0", "Node$1"]},
        "fields": {"adj": [["Node$0", "Node$1"]]},
        "universe": ["Node$0", "Node$1"]
    })
}

fn sample_theme() -> Theme {
    serde_json::from_str(
        r##"{"perSig":{"Node":{"color":"#aa00ff","shape":"hexagon","visible":true,"label":"N"}},"perField":{"adj":{"color":"#000000","visible":true}},"projection":["Node"]}"##,
    )
    .unwrap()
}

#[test]
fn instance_round_trip() {
    let repo = Repository::in_memory();
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let exec = repo
        .record_execution(&links.public, None, CHALLENGES_MODEL, "Inv1OK", ExecResult::Sat)
        .unwrap();
    let layout: BTreeMap<String, Point> = [
        ("Node$0".to_string(), Point { x: 0.1 + 0.2, y: -1e-300 }),
        ("Node$1".to_string(), Point { x: 123.456789012345, y: 7.0 }),
    ]
    .into();
    let tok = repo
        .save_instance(&exec, "Inv1OK", 1, sample_instance(), sample_theme(), layout.clone())
        .unwrap();
    let back = repo.load_instance(&tok).unwrap();
    assert_eq!(back.instance, sample_instance());
    assert_eq!(back.theme, sample_theme());
    assert_eq!(back.layout, layout);
    assert_eq!(back.skip, 1);
    assert!(matches!(repo.load_instance("missingtokn"), Err(RepoError::NotFound)));
}

#[test]
fn instance_validation() {
    let repo = Repository::in_memory();
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let mut theme = sample_theme();
    theme.projection = vec!["Ghost".into()];
    assert!(matches!(
        repo.save_instance(&links.public, "Inv1OK", 0, sample_instance(), theme, BTreeMap::new()),
        Err(RepoError::Theme(ThemeError::UnknownProjection(_)))
    ));
    let layout: BTreeMap<String, Point> = [("Ghost$0".to_string(), Point { x: 0.0, y: 0.0 })].into();
    assert!(matches!(
        repo.save_instance(&links.public, "Inv1OK", 0, sample_instance(), sample_theme(), layout),
        Err(RepoError::BadLayout(_))
    ));
    assert!(matches!(
        repo.save_instance(&links.public, "Inv1OK", 0, serde_json::json!([1]), sample_theme(), BTreeMap::new()),
        Err(RepoError::BadInstance(_))
    ));
    assert!(matches!(
        repo.save_instance("nobody", "Inv1OK", 0, sample_instance(), sample_theme(), BTreeMap::new()),
        Err(RepoError::NotFound)
    ));
}

#[test]
fn tokens_unique_across_kinds() {
    let repo = Repository::in_memory();
    let mut seen = HashSet::new();
    for _ in 0..200 {
        let l = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
        assert!(seen.insert(l.public.clone()));
        assert!(seen.insert(l.private.unwrap()));
        let t = repo
            .save_instance(&l.public, "Inv1OK", 0, sample_instance(), Theme::default(), BTreeMap::new())
            .unwrap();
        assert!(seen.insert(t));
    }
}

#[test]
fn file_store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let (links, exec, inst, tree) = {
        let repo = Repository::open(Box::new(FileStore::open(&path).unwrap())).unwrap();
        let links = repo.save_shared(CHALLENGES_MODEL, Some(sample_theme())).unwrap();
        let exec = repo
            .record_execution(&links.public, None, "x", "Inv1OK", ExecResult::Limit)
            .unwrap();
        let inst = repo
            .save_instance(&exec, "Inv1OK", 0, sample_instance(), sample_theme(), BTreeMap::new())
            .unwrap();
        let tree = repo.export_tree(links.private.as_ref().unwrap()).unwrap();
        repo.health().unwrap();
        (links, exec, inst, tree)
    };
    let repo = Repository::open(Box::new(FileStore::open(&path).unwrap())).unwrap();
    assert_eq!(repo.export_tree(links.private.as_ref().unwrap()).unwrap(), tree);
    assert_eq!(repo.model(&exec).unwrap().result, Some(ExecResult::Limit));
    assert_eq!(repo.load_instance(&inst).unwrap().instance, sample_instance());
    assert_eq!(repo.load_by_token(&links.public).unwrap().theme, Some(sample_theme()));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("{\"format\":\"a4f-store\",\"version\":1}\n"));
}

#[test]
fn corruption_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let repo = Repository::open(Box::new(FileStore::open(&path).unwrap())).unwrap();
    repo.save_shared(PLAIN, None).unwrap();
    repo.health().unwrap();

    // Truncation under a running repository.
    std::fs::OpenOptions::new().write(true).open(&path).unwrap().set_len(10).unwrap();
    assert!(matches!(repo.health(), Err(RepoError::Store(StoreError::Corrupt { .. }))));

    // A garbage line on reopen.
    std::fs::write(&path, "{\"format\":\"a4f-store\",\"version\":1}\n").unwrap();
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    writeln!(f, "{{not json").unwrap();
    assert!(matches!(
        Repository::open(Box::new(FileStore::open(&path).unwrap())),
        Err(RepoError::Store(StoreError::Corrupt { line: 2, .. }))
    ));

    std::fs::write(&path, "hello\n").unwrap();
    assert!(matches!(
        Repository::open(Box::new(FileStore::open(&path).unwrap())),
        Err(RepoError::Store(StoreError::Corrupt { line: 1, .. }))
    ));
}

#[test]
fn concurrent_writers() {
    let repo = std::sync::Arc::new(Repository::in_memory());
    let links = repo.save_shared(CHALLENGES_MODEL, None).unwrap();
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let repo = repo.clone();
            let public = links.public.clone();
            std::thread::spawn(move || {
                let mut parent: Option<String> = None;
                for i in 0..25 {
                    let id = repo
                        .record_execution(&public, parent.as_deref(), &format!("{t}/{i}"), "Inv1OK", ExecResult::Sat)
                        .unwrap();
                    parent = Some(id);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let tree = repo.export_tree(links.private.as_ref().unwrap()).unwrap();
    assert_eq!(tree.nodes.len(), 201);
    let roots = tree.nodes.iter().filter(|n| n.parent.is_none()).count();
    assert_eq!(roots, 1);
}
