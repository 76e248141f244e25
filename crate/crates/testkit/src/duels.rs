//! Hand-written challenge triples: a hidden spec, a logically equivalent
//! candidate and an inequivalent one.

#[derive(Debug, Clone, Copy)]
pub struct Duel {
    pub name: &'static str,
    pub decls: &'static str,
    pub spec: &'static str,
    pub equivalent: &'static str,
    pub inequivalent: &'static str,
    pub scope: u32,
}

const GRAPH: &str = "sig Node { adj: set Node }";
const FAMILY: &str = "sig Person { spouse: lone Person, parent: set Person }";
const FILES: &str = "abstract sig Obj {}\nsig File extends Obj {}\nsig Dir extends Obj { contents: set Obj }";
const HOTEL: &str = "sig Room {}\nsig Key {}\nsig Guest { keys: Room -> Key }";

pub const DUELS: [Duel; 20] = [
    Duel {
        name: "Irreflexive",
        decls: GRAPH,
        spec: "no n: Node | n in n.adj",
        equivalent: "no iden & adj",
        inequivalent: "no adj",
        scope: 3,
    },
    Duel {
        name: "Symmetric",
        decls: GRAPH,
        spec: "adj = ~adj",
        equivalent: "adj in ~adj",
        inequivalent: "some adj",
        scope: 3,
    },
    Duel {
        name: "StronglyConnected",
        decls: GRAPH,
        spec: "all n: Node | Node in n.*adj",
        equivalent: "Node -> Node in *adj",
        inequivalent: "all n: Node | Node in n.^adj",
        scope: 3,
    },
    Duel {
        name: "Acyclic",
        decls: GRAPH,
        spec: "no n: Node | n in n.^adj",
        equivalent: "no ^adj & iden",
        inequivalent: "no n: Node | n in n.adj",
        scope: 3,
    },
    Duel {
        name: "Functional",
        decls: GRAPH,
        spec: "all n: Node | lone n.adj",
        equivalent: "~adj.adj in iden",
        inequivalent: "all n: Node | one n.adj",
        scope: 3,
    },
    Duel {
        name: "Injective",
        decls: GRAPH,
        spec: "all n: Node | lone adj.n",
        equivalent: "adj.~adj in iden",
        inequivalent: "all n: Node | lone n.adj",
        scope: 3,
    },
    Duel {
        name: "HasSink",
        decls: GRAPH,
        spec: "some n: Node | no n.adj",
        equivalent: "not (all n: Node | some n.adj)",
        inequivalent: "no n: Node | some n.adj",
        scope: 3,
    },
    Duel {
        name: "Transitive",
        decls: GRAPH,
        spec: "adj.adj in adj",
        equivalent: "all a, b, c: Node | (b in a.adj and c in b.adj) implies c in a.adj",
        inequivalent: "adj.adj = adj",
        scope: 3,
    },
    Duel {
        name: "SingleSource",
        decls: GRAPH,
        spec: "one n: Node | no adj.n",
        equivalent: "one Node - Node.adj",
        inequivalent: "some n: Node | no adj.n",
        scope: 3,
    },
    Duel {
        name: "SpouseSymmetric",
        decls: FAMILY,
        spec: "spouse = ~spouse",
        equivalent: "all p, q: Person | q in p.spouse iff p in q.spouse",
        inequivalent: "no spouse & iden",
        scope: 3,
    },
    Duel {
        name: "NoSelfAncestor",
        decls: FAMILY,
        spec: "no p: Person | p in p.^parent",
        equivalent: "no iden & ^parent",
        inequivalent: "no iden & parent",
        scope: 3,
    },
    Duel {
        name: "AllMarried",
        decls: FAMILY,
        spec: "all p: Person | one p.spouse",
        equivalent: "Person in spouse.Person",
        inequivalent: "some spouse",
        scope: 3,
    },
    Duel {
        name: "NotMarriedToParent",
        decls: FAMILY,
        spec: "no spouse & parent",
        equivalent: "all p: Person | no p.spouse & p.parent",
        inequivalent: "no spouse & ~parent",
        scope: 3,
    },
    Duel {
        name: "FilesStored",
        decls: FILES,
        spec: "all f: File | some contents.f",
        equivalent: "File in Dir.contents",
        inequivalent: "some Dir.contents",
        scope: 3,
    },
    Duel {
        name: "NoDirLoop",
        decls: FILES,
        spec: "no d: Dir | d in d.^contents",
        equivalent: "no ^contents & iden",
        inequivalent: "no contents & iden",
        scope: 3,
    },
    Duel {
        name: "SingleLocation",
        decls: FILES,
        spec: "all o: Obj | lone contents.o",
        equivalent: "contents.~contents in iden",
        inequivalent: "all d: Dir | lone d.contents",
        scope: 3,
    },
    Duel {
        name: "OneRoot",
        decls: FILES,
        spec: "one d: Dir | no contents.d",
        equivalent: "one Dir - Dir.contents",
        inequivalent: "some d: Dir | no contents.d",
        scope: 3,
    },
    Duel {
        name: "KeyOpensOneRoom",
        decls: HOTEL,
        spec: "all g: Guest, k: Key | lone g.keys.k",
        equivalent: "all g: Guest | (g.keys).~(g.keys) in iden",
        inequivalent: "all g: Guest, r: Room | lone r.(g.keys)",
        scope: 2,
    },
    Duel {
        name: "MasterGuest",
        decls: HOTEL,
        spec: "some g: Guest | all r: Room | some r.(g.keys)",
        equivalent: "some g: Guest | Room in (g.keys).Key",
        inequivalent: "all g: Guest | Room in (g.keys).Key",
        scope: 2,
    },
    Duel {
        name: "UnsharedKeys",
        decls: HOTEL,
        spec: "all g, h: Guest | g != h implies no Room.(g.keys) & Room.(h.keys)",
        equivalent: "all k: Key | lone (keys.k).Room",
        inequivalent: "all g: Guest | lone Room.(g.keys)",
        scope: 2,
    },
];

impl Duel {
    pub fn candidate_pred(&self) -> String {
        format!("{}Cand", self.name)
    }

    pub fn check_name(&self) -> String {
        format!("{}OK", self.name)
    }

    /// The stored challenge: declarations, an empty public predicate, the
    /// hidden spec and the secret equivalence check.
    pub fn model(&self) -> String {
        format!(
            "{}\n\npred {} {{\n}}\n\n//SECRET\npred {}Spec {{\n  {}\n}}\n\n//SECRET\ncheck {} {{ {} <=> {}Spec }} for {}\n",
            self.decls,
            self.candidate_pred(),
            self.name,
            self.spec,
            self.check_name(),
            self.candidate_pred(),
            self.name,
            self.scope
        )
    }

    /// The public view with the candidate predicate filled in.
    pub fn submission(&self, public_text: &str, body: &str) -> String {
        let empty = format!("pred {} {{\n}}", self.candidate_pred());
        let filled = format!("pred {} {{\n  {}\n}}", self.candidate_pred(), body);
        assert!(public_text.contains(&empty), "public view keeps the empty predicate");
        public_text.replacen(&empty, &filled, 1)
    }
}
