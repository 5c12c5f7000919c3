use nodal_core::linalg::Matrix;
use nodal_core::loop_matrix::{build_loop_matrix, Flavor, SpectralDecomposition};
use nodal_core::pairings::{enumerate_pairings, ActionFlavor, Permutation};
use nodal_core::pairings::act_permutation;
use nodal_core::partitions::even_row_partitions;
use nodal_core::rational::int;
use nodal_core::tensor_oracle::{
    diagonal_insertion_matrix, form_tensor, invariant_map_rank, BilinearSpace,
};
use num_bigint::BigUint;

fn spaces() -> Vec<BilinearSpace> {
    let mut out = Vec::new();
    for k in 1..=3 {
        out.push(BilinearSpace::orthogonal(k).unwrap());
        out.push(BilinearSpace::symplectic(k).unwrap());
    }
    out
}

#[test]
fn brute_force_matches_loop_matrix() {
    for n in 1..=3 {
        for space in spaces() {
            let brute = diagonal_insertion_matrix(n, &space).unwrap();
            let x = space.flavor().specialization();
            let expected = build_loop_matrix(n, &x).unwrap().matrix;
            assert_eq!(brute, expected, "n = {n}, {:?}", space.flavor());
        }
    }
}

#[test]
fn rank_matches_admissible_hook_sum_and_kernel_is_inadmissible() {
    for n in 1..=3 {
        let decomposition = SpectralDecomposition::auto(n).unwrap();
        for space in spaces() {
            let flavor = space.flavor();
            let result = invariant_map_rank(n, &space).unwrap();
            let admissible: BigUint = even_row_partitions(2 * n)
                .unwrap()
                .iter()
                .filter(|l| flavor.admits(l))
                .map(|l| l.hook_dimension())
                .sum();
            assert_eq!(BigUint::from(result.rank), admissible, "n = {n}, {flavor:?}");
            for v in &result.kernel {
                let comps = decomposition.components(v).unwrap();
                for (c, block) in comps.iter().zip(decomposition.blocks()) {
                    if flavor.admits(&block.partition) {
                        assert!(c.is_zero(), "kernel meets admitted block {}", block.partition);
                    }
                }
            }
        }
    }
}

#[test]
fn kernel_dimension_of_specialized_loop_matrix() {
    for n in 1..=3 {
        for k in 1..=3 {
            for flavor in [Flavor::orthogonal(k).unwrap(), Flavor::symplectic(k).unwrap()] {
                let m = build_loop_matrix(n, &flavor.specialization()).unwrap().matrix;
                let expected: BigUint = even_row_partitions(2 * n)
                    .unwrap()
                    .iter()
                    .filter(|l| !flavor.admits(l))
                    .map(|l| l.hook_dimension())
                    .sum();
                let kernel_dim = m.rows() - m.rank();
                assert_eq!(BigUint::from(kernel_dim), expected, "n = {n}, {flavor:?}");
            }
        }
    }
}

#[test]
fn equivariance_under_transpositions() {
    for (n, k) in [(2usize, 2usize), (3, 1)] {
        for space in [BilinearSpace::orthogonal(k).unwrap(), BilinearSpace::symplectic(k).unwrap()] {
            let symplectic = matches!(space.flavor(), Flavor::Symplectic { .. });
            for p in enumerate_pairings(n).unwrap() {
                for i in 1..=2 * n {
                    for j in i + 1..=2 * n {
                        let tau = Permutation::transposition(2 * n, i, j).unwrap();
                        let (moved, _) = act_permutation(&tau, &p, ActionFlavor::Plain).unwrap();
                        let lhs = form_tensor(&moved, &space).unwrap();
                        let rhs = form_tensor(&p, &space).unwrap().permute_slots(&tau).unwrap();
                        let rhs = if symplectic { rhs.scale(&int(-1)) } else { rhs };
                        assert_eq!(lhs, rhs, "tau = ({i} {j}), P = {p}, {:?}", space.flavor());
                    }
                }
            }
        }
    }
}

#[test]
fn specialised_matrices_are_symmetric() {
    for n in 1..=3 {
        let m: Matrix = build_loop_matrix(n, &int(-4)).unwrap().matrix;
        assert!(m.is_symmetric());
    }
}
