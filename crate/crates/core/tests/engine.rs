use std::collections::BTreeSet;

use pl9::{Engine, EngineError, Error};

fn eng(src: &str) -> Engine {
    Engine::from_source(src).unwrap()
}

fn all(e: &mut Engine, goal: &str, var: &str) -> Vec<String> {
    e.solve_all(goal, None)
        .unwrap()
        .into_iter()
        .map(|s| s.get(var).unwrap().to_string())
        .collect()
}

fn one(e: &mut Engine, goal: &str, var: &str) -> Option<String> {
    e.solve_once(goal).unwrap().map(|s| s.get(var).unwrap().to_string())
}

fn engine_error(e: &mut Engine, goal: &str) -> EngineError {
    match e.solve_once(goal) {
        Err(Error::Engine(err)) => err,
        other => panic!("{goal}: expected an engine error, got {other:?}"),
    }
}

const MEMBER: &str = "
mem(X,[Y|_]) ?=> X=Y.
mem(X,[_|L]) => mem(X,L).
";

#[test]
fn member_enumerates_the_list_in_order() {
    let mut e = eng(MEMBER);
    assert_eq!(all(&mut e, "mem(X,[1,2,3])", "X"), ["1", "2", "3"]);
    assert_eq!(all(&mut e, "mem(X,[a,b,a])", "X"), ["a", "b", "a"]);
    assert!(e.solve_once("mem(X,[])").unwrap().is_none());
    assert_eq!(all(&mut e, "member(X,[c,d])", "X"), ["c", "d"]);
}

#[test]
fn select_yields_each_element_and_remainder() {
    let mut e = eng("");
    let sols = e.solve_all("select(X,[1,2,3],R)", None).unwrap();
    let pairs: Vec<(String, String)> = sols
        .iter()
        .map(|s| (s.get("X").unwrap().into(), s.get("R").unwrap().into()))
        .collect();
    assert_eq!(
        pairs,
        [
            ("1".into(), "[2,3]".into()),
            ("2".into(), "[1,3]".into()),
            ("3".into(), "[1,2]".into())
        ]
    );
}

#[test]
fn nonlinear_heads_need_identical_arguments() {
    let mut e = eng("p(X,X) => true.\nq(X,X) ?=> true.\nq(_,_) => fail.\n");
    assert!(e.solve_once("p(1,1)").unwrap().is_some());
    assert!(e.solve_once("p(1,2)").unwrap().is_none());
    assert!(e.solve_once("p($f(a),$f(a))").unwrap().is_some());
    assert!(e.solve_once("p(A,B)").unwrap().is_none());
    assert!(e.solve_once("q(A,1)").unwrap().is_none());
}

#[test]
fn matching_fails_rather_than_binding_call_variables() {
    let mut e = eng("isf(f(1)) => true.\nhead([H|_]) = H.\n");
    assert!(e.solve_once("isf(U)").unwrap().is_none());
    assert!(e.solve_once("isf($f(U))").unwrap().is_none());
    assert!(e.solve_once("isf($f(1))").unwrap().is_some());
    let err = engine_error(&mut e, "X = head(L)");
    assert_eq!(err.kind(), "unresolved_function_call");
}

#[test]
fn as_patterns_bind_the_whole_argument() {
    let mut e = eng("split(V@[H|T], A, B, C) => A = V, B = H, C = T.\n");
    let s = e.solve_once("split([1,2], A, B, C)").unwrap().unwrap();
    assert_eq!(s.get("A"), Some("[1,2]"));
    assert_eq!(s.get("B"), Some("1"));
    assert_eq!(s.get("C"), Some("[2]"));
}

#[test]
fn nonbacktrackable_rules_commit() {
    let mut e = eng("p(X) => X = 1, fail.\np(X) => X = 2.\nq(X) ?=> X = 1, fail.\nq(X) => X = 2.\n");
    assert!(e.solve_once("p(X)").unwrap().is_none());
    assert_eq!(one(&mut e, "q(X)", "X").as_deref(), Some("2"));
}

#[test]
fn conditions_select_rules_and_do_not_leave_choice_points() {
    let mut e = eng("
        sign(X) = S, X < 0 => S = -1.
        sign(X) = S, X > 0 => S = 1.
        sign(_) = S => S = 0.
        pick(X), member(X, [1,2,3]) => true.
    ");
    assert_eq!(one(&mut e, "S = sign(-5)", "S").as_deref(), Some("-1"));
    assert_eq!(one(&mut e, "S = sign(0)", "S").as_deref(), Some("0"));
    assert_eq!(all(&mut e, "pick(X)", "X"), ["1"]);
}

#[test]
fn functions_and_predicates_agree() {
    let mut e = eng("
        power_set([]) = [[]].
        power_set([H|T]) = P1++P2 =>
            P1 = power_set(T),
            P2 = [[H|S] : S in P1].
        perm([]) = [[]].
        perm(Lst) = [[E|P] : E in Lst, P in perm(Lst.delete(E))].
        double(X) = 2*X.
        double_p(X, Y) => Y = 2*X.
    ");
    assert_eq!(one(&mut e, "P = power_set([])", "P").as_deref(), Some("[[]]"));
    let subsets = one(&mut e, "P = power_set([1,2])", "P").unwrap();
    assert_eq!(subsets, "[[],[2],[1],[1,2]]");
    let perms: Vec<Vec<i64>> = {
        let s = one(&mut e, "P = perm([1,2,3])", "P").unwrap();
        let ns: Vec<i64> = s.chars().filter_map(|c| c.to_digit(10)).map(i64::from).collect();
        ns.chunks(3).map(|c| c.to_vec()).collect()
    };
    let distinct: BTreeSet<Vec<i64>> = perms.iter().cloned().collect();
    assert_eq!(perms.len(), 6);
    assert_eq!(distinct.len(), 6);
    for x in -3..4 {
        let f = one(&mut e, &format!("Y = double({x})"), "Y");
        let p = one(&mut e, &format!("double_p({x}, Y)"), "Y");
        assert_eq!(f, p);
    }
}

#[test]
fn matrix_multiplication_with_loops() {
    let mut e = eng("
        matrix_multi(A,B) = C =>
            C = new_array(A.length,B[1].length),
            foreach (I in 1..A.length, J in 1..B[1].length)
                C[I,J] = sum([A[I,K]*B[K,J] : K in 1..A[1].length])
            end.
    ");
    let c = one(&mut e, "C = matrix_multi({{1,2},{3,4}}, {{5,6},{7,8}})", "C").unwrap();
    assert_eq!(c, "{{19,22},{43,50}}");
}

#[test]
fn loop_scoping_keeps_outer_variables_global() {
    let mut e = eng("
        q(X) => X = 7.
        p(A) =>
            q(X),
            foreach (I in 1 .. A.length)
                A[I] = (X,Y)
            end.
    ");
    let s = one(&mut e, "A = {_, _}, p(A)", "A").unwrap();
    assert!(s.starts_with("{(7,"), "{s}");
    let inner: Vec<&str> = s.trim_matches(|c| c == '{' || c == '}').split("),(").collect();
    assert_eq!(inner.len(), 2);
    assert_ne!(inner[0].trim_start_matches("(7,"), inner[1].trim_end_matches(')').trim_start_matches("7,"));
}

#[test]
fn unresolved_function_call_is_raised() {
    let mut e = eng("g(1) = one.\n");
    assert_eq!(one(&mut e, "Y = g(1)", "Y").as_deref(), Some("one"));
    assert_eq!(engine_error(&mut e, "Y = g(2)").kind(), "unresolved_function_call");
    assert_eq!(engine_error(&mut e, "Y = undefined_f(1)").kind(), "unresolved_function_call");
}

#[test]
fn undefined_predicates_raise() {
    let mut e = eng("");
    assert_eq!(engine_error(&mut e, "nothing_here(1)").kind(), "unknown_predicate");
}

#[test]
fn unification_and_backtracking_restore_bindings() {
    let mut e = eng("");
    assert!(e.solve_once("X = 1, X = 2").unwrap().is_none());
    let s = e.solve_once("$f(X,2) = $f(1,Y)").unwrap().unwrap();
    assert_eq!((s.get("X"), s.get("Y")), (Some("1"), Some("2")));
    assert!(e.solve_once("X = $f(X)").unwrap().is_some());
    let xs = all(&mut e, "member(X,[1,2,3]), Y = X", "Y");
    assert_eq!(xs, ["1", "2", "3"]);
    let s = e.solve_once("(member(X,[1,2]), X > 5 ; Z = none), var(X)").unwrap().unwrap();
    assert_eq!(s.get("Z"), Some("none"));
}

#[test]
fn arithmetic_and_indexing() {
    let mut e = eng("");
    assert_eq!(one(&mut e, "X = 3+4*2", "X").as_deref(), Some("11"));
    assert_eq!(one(&mut e, "X = {10,20,30}[2]", "X").as_deref(), Some("20"));
    assert_eq!(one(&mut e, "T = {{1},{2,3}}, X = T[2,1]", "X").as_deref(), Some("2"));
    assert_eq!(one(&mut e, "X = [a,b,c].length", "X").as_deref(), Some("3"));
    assert_eq!(engine_error(&mut e, "X = Y + 1").kind(), "instantiation_error");
    assert_eq!(engine_error(&mut e, "X = {1,2}[3]").kind(), "index_error");
}

#[test]
fn strings_are_character_lists() {
    let mut e = eng("");
    assert_eq!(one(&mut e, "X = \"ab\" ++ \"c\", N = X.length", "N").as_deref(), Some("3"));
}

#[test]
fn writeln_goes_to_the_output_sink() {
    let mut e = eng("main => writeln(hello), X = [1,2], writeln(X).\n");
    assert!(e.solve_once("main").unwrap().is_some());
    assert_eq!(e.take_output(), "hello\n[1,2]\n");
}

#[test]
fn builtin_list_functions() {
    let mut e = eng("");
    assert_eq!(one(&mut e, "X = sort([3,1,2])", "X").as_deref(), Some("[1,2,3]"));
    assert_eq!(one(&mut e, "X = insert_ordered([1,3], 2)", "X").as_deref(), Some("[1,2,3]"));
    assert_eq!(one(&mut e, "X = delete([1,2,1], 1)", "X").as_deref(), Some("[2,1]"));
    assert_eq!(one(&mut e, "X = new_list(2)", "X").map(|s| s.starts_with('[')), Some(true));
    assert_eq!(one(&mut e, "X = sum([1,2,3])", "X").as_deref(), Some("6"));
}
