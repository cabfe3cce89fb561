use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use aspunit_core::parser::parse_program;
use aspunit_core::solver::{ground, Enumerator, GroundProgram};

/// `n` independent binary guesses: 2^n answer sets.
fn guesses(n: usize) -> GroundProgram {
    let nodes: String = (1..=n).map(|i| format!("node({i}). ")).collect();
    let text = format!("{nodes}\nin(X) | out(X) :- node(X).\n");
    ground(&parse_program(&text, "bench").unwrap().value).unwrap()
}

/// Cliques of a circulant graph on `n` nodes, with the size-maximizing weak constraint.
fn cliques(n: usize) -> GroundProgram {
    let mut text = String::new();
    for i in 1..=n {
        text.push_str(&format!("node({i}). "));
        for d in [1, 2, 5] {
            let j = (i + d - 1) % n + 1;
            text.push_str(&format!("edge({i},{j}). "));
        }
    }
    text.push_str(
        "\ninClique(X) | outClique(X) :- node(X).\n\
         uedge(X,Y) :- edge(X,Y), X < Y.\n\
         uedge(Y,X) :- edge(X,Y), Y < X.\n\
         :- inClique(X), inClique(Y), X < Y, not uedge(X,Y).\n\
         :~ outClique(X). [1:1]\n",
    );
    ground(&parse_program(&text, "bench").unwrap().value).unwrap()
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    let cases = [
        ("guess", 10, guesses(10)),
        ("guess", 14, guesses(14)),
        ("clique", 14, cliques(14)),
        ("clique", 20, cliques(20)),
    ];
    for (name, n, g) in &cases {
        let models = Enumerator {
            free_atom_cap: 48,
            ..Enumerator::sequential()
        }
        .enumerate(g)
        .unwrap()
        .len();
        group.throughput(Throughput::Elements(models as u64));
        for (mode, e) in [("sequential", Enumerator::sequential()), ("parallel", Enumerator::parallel())] {
            let e = Enumerator { free_atom_cap: 48, ..e };
            group.bench_with_input(BenchmarkId::new(format!("{name}/{mode}"), n), g, |b, g| {
                b.iter(|| e.enumerate(g).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
