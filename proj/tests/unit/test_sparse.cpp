#include <doctest.h>

#include <cmath>

#include "osr/matrix.hpp"
#include "osr/rng.hpp"
#include "osr/sparse.hpp"

using namespace osr;

namespace {

Matrix random_dict(Rng& rng, int n, int m) {
    Matrix d(n, m);
    for (double& v : d.data) v = rng.next_gaussian();
    return d;
}

Matrix gram_schmidt_basis(Rng& rng, int n) {
    Matrix q = random_dict(rng, n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < j; ++k) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += q.at(i, j) * q.at(i, k);
            for (int i = 0; i < n; ++i) q.at(i, j) -= dot * q.at(i, k);
        }
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) nrm += q.at(i, j) * q.at(i, j);
        nrm = std::sqrt(nrm);
        for (int i = 0; i < n; ++i) q.at(i, j) /= nrm;
    }
    return q;
}

} // namespace

TEST_CASE("threshold operators") {
    CHECK(soft_threshold(5.0, 2.0) == 3.0);
    CHECK(soft_threshold(-1.0, 2.0) == 0.0);
    CHECK(soft_threshold(-5.0, 2.0) == -3.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double z = rng.uniform(-10.0, 10.0);
        CHECK(soft_threshold(z, 0.0) == z);
    }
    CHECK(hard_threshold(5.0, 2.0) == 5.0);
    CHECK(hard_threshold(2.0, 2.0) == 0.0); // boundary maps to zero
    CHECK(hard_threshold(-3.0, 2.0) == -3.0);
    CHECK(hard_threshold(0.5, 0.0) == 0.5);
}

TEST_CASE("shrinkage is nonexpansive") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-5.0, 5.0), b = rng.uniform(-5.0, 5.0);
        const double beta = rng.uniform(0.0, 2.0);
        CHECK(std::abs(soft_threshold(a, beta) - soft_threshold(b, beta)) <= std::abs(a - b) + 1e-15);
    }
}

TEST_CASE("soft threshold equals its relu form exactly") {
    Rng rng(3);
    std::vector<double> z(10000);
    for (double& v : z) v = rng.uniform(-4.0, 4.0);
    CHECK(relu_soft_identity_check(z, 1.0));
    CHECK(relu_soft_identity_check(z, 0.0));
    CHECK(relu_soft_identity_check(z, 0.37));
}

TEST_CASE("cost function forced values and oracle") {
    Rng rng(4);
    // z = 0 -> half the observation energy
    {
        SyntheticInstance inst = make_random_instance(rng, 6, 9, 2, 0.3);
        double e = 0.0;
        for (double v : inst.problem.y) e += v * v;
        CHECK(cost_f(inst.problem, std::vector<double>(9, 0.0)) == doctest::Approx(0.5 * e).epsilon(1e-12));
    }
    // D = I, y = z, lambda = 0 -> 0
    {
        Matrix eye(4, 4, 0.0);
        for (int i = 0; i < 4; ++i) eye.at(i, i) = 1.0;
        std::vector<double> z{1.0, -2.0, 0.0, 3.0};
        SparseProblem p = make_sparse_problem(eye, z, 0.0);
        CHECK(cost_f(p, z) == doctest::Approx(0.0).epsilon(1e-15));
    }
    // random instance vs independent evaluation
    {
        SyntheticInstance inst = make_random_instance(rng, 5, 8, 3, 0.25);
        std::vector<double> z(8);
        for (double& v : z) v = rng.next_gaussian();
        const auto dz = matvec(inst.problem.dict, z);
        double quad = 0.0;
        for (int i = 0; i < 5; ++i) quad += (inst.problem.y[i] - dz[i]) * (inst.problem.y[i] - dz[i]);
        double l1 = 0.0;
        for (double v : z) l1 += std::abs(v);
        CHECK(cost_f(inst.problem, z) == doctest::Approx(0.5 * quad + 0.25 * l1).epsilon(1e-12));
    }
}

TEST_CASE("surrogate is tangent at z_prev and majorizes elsewhere") {
    Rng rng(5);
    SyntheticInstance inst = make_random_instance(rng, 6, 10, 3, 0.2);
    std::vector<double> z(10);
    for (double& v : z) v = rng.next_gaussian();
    CHECK(surrogate_q(inst.problem, z, z) == doctest::Approx(cost_f(inst.problem, z)).epsilon(1e-12));

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(10), b(10);
        for (double& v : a) v = rng.next_gaussian();
        for (double& v : b) v = rng.next_gaussian();
        CHECK(surrogate_q(inst.problem, a, b) >= cost_f(inst.problem, a) - 1e-10);
    }

    // direct formula oracle
    std::vector<double> zp(10);
    for (double& v : zp) v = rng.next_gaussian();
    const auto dz = matvec(inst.problem.dict, z);
    const auto dzp = matvec(inst.problem.dict, zp);
    double dist = 0.0, ddist = 0.0;
    for (int i = 0; i < 10; ++i) dist += (z[i] - zp[i]) * (z[i] - zp[i]);
    for (int i = 0; i < 6; ++i) ddist += (dz[i] - dzp[i]) * (dz[i] - dzp[i]);
    const double want = cost_f(inst.problem, z) + 0.5 * inst.problem.c * dist - 0.5 * ddist;
    CHECK(surrogate_q(inst.problem, z, zp) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ista step: identity dictionary closed form") {
    Matrix eye(5, 5, 0.0);
    for (int i = 0; i < 5; ++i) eye.at(i, i) = 1.0;
    std::vector<double> y{2.0, -0.3, 0.05, -4.0, 0.6};
    const double lambda = 0.5;
    SparseProblem p = make_sparse_problem(eye, y, lambda);
    const auto z1 = ista_step(p, std::vector<double>(5, 0.0));
    for (int i = 0; i < 5; ++i) {
        CHECK(z1[i] == doctest::Approx(soft_threshold(y[i] / p.c, lambda / p.c)).epsilon(1e-12));
        // c = 1.01 keeps this within a few percent of the thresholded projection
        CHECK(z1[i] == doctest::Approx(soft_threshold(y[i], lambda)).epsilon(0.05));
    }
}

TEST_CASE("ista fixed point stays put") {
    Rng rng(6);
    SyntheticInstance inst = make_random_instance(rng, 8, 16, 3, 0.1);
    const IstaState st = ista_solve(inst.problem, 200000, 1e-15);
    REQUIRE(st.converged);
    const auto next = ista_step(inst.problem, st.z);
    for (size_t i = 0; i < next.size(); ++i) CHECK(std::abs(next[i] - st.z[i]) < 1e-12);
}

TEST_CASE("ista solve: full shrinkage and orthonormal cases") {
    Rng rng(7);
    {
        SyntheticInstance inst = make_random_instance(rng, 6, 9, 2, 0.0);
        const auto dty = matvec_t(inst.problem.dict, inst.problem.y);
        double linf = 0.0;
        for (double v : dty) linf = std::max(linf, std::abs(v));
        SparseProblem p = inst.problem;
        p.lambda = linf; // threshold swallows the first projection entirely
        const IstaState st = ista_solve(p, 100, 1e-12);
        CHECK(st.converged);
        for (double v : st.z) CHECK(v == 0.0);
    }
    {
        const Matrix q = gram_schmidt_basis(rng, 7);
        std::vector<double> y(7);
        for (double& v : y) v = rng.next_gaussian();
        SparseProblem p = make_sparse_problem(q, y, 0.0);
        const IstaState st = ista_solve(p, 100000, 1e-14);
        const auto want = matvec_t(p.dict, y);
        REQUIRE(st.converged);
        for (int i = 0; i < 7; ++i) CHECK(st.z[i] == doctest::Approx(want[i]).epsilon(1e-6));
    }
}

TEST_CASE("ista cost history is monotone on random instances") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        SyntheticInstance inst = make_random_instance(rng, 8, 16, 4, rng.uniform(0.01, 0.5));
        const IstaState st = ista_solve(inst.problem, 500, 1e-14);
        for (size_t i = 1; i < st.cost_history.size(); ++i)
            CHECK(st.cost_history[i] <= st.cost_history[i - 1] + 1e-12);
    }
}

TEST_CASE("non-convergence is reported in the state, not thrown") {
    Rng rng(9);
    SyntheticInstance inst = make_random_instance(rng, 8, 16, 4, 0.05);
    const IstaState st = ista_solve(inst.problem, 3, 1e-16);
    CHECK_FALSE(st.converged);
    CHECK(st.iterations == 3);
    CHECK(st.cost_history.size() == 4);
}

TEST_CASE("mutual coherence") {
    Rng rng(10);
    const Matrix q = gram_schmidt_basis(rng, 6);
    CHECK(mutual_coherence(q) < 1e-12);

    Matrix dup(4, 3);
    for (int i = 0; i < 4; ++i) {
        const double v = rng.next_gaussian();
        dup.at(i, 0) = v;
        dup.at(i, 2) = 2.0 * v; // scaled duplicate column
        dup.at(i, 1) = rng.next_gaussian();
    }
    CHECK(mutual_coherence(dup) == doctest::Approx(1.0).epsilon(1e-12));

    // power-of-two entries keep the ratio exact
    Matrix exact_dup(4, 2, 1.0);
    for (int i = 0; i < 4; ++i) exact_dup.at(i, 1) = 2.0;
    CHECK(mutual_coherence(exact_dup) == 1.0);

    // independent pairwise oracle with explicit normalization
    const Matrix d = random_dict(rng, 6, 10);
    double want = 0.0;
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
            if (a == b) continue;
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (int i = 0; i < 6; ++i) {
                dot += d.at(i, a) * d.at(i, b);
                na += d.at(i, a) * d.at(i, a);
                nb += d.at(i, b) * d.at(i, b);
            }
            want = std::max(want, std::abs(dot) / std::sqrt(na * nb));
        }
    CHECK(mutual_coherence(d) == doctest::Approx(want).epsilon(1e-12));

    Matrix zero_col(3, 2, 0.0);
    zero_col.at(0, 0) = 1.0;
    CHECK_THROWS_AS(mutual_coherence(zero_col), DomainError);
    Matrix one_col(3, 1, 1.0);
    CHECK_THROWS_AS(mutual_coherence(one_col), ContractError);
}

TEST_CASE("recovery bound predicate") {
    Rng rng(11);
    const Matrix q = gram_schmidt_basis(rng, 5);
    std::vector<double> z(5, 1.0); // full support, orthonormal -> still fine
    CHECK(recovery_bound_ok(q, z));

    Matrix dup(4, 2, 1.0); // identical unit columns, mu exactly 1
    std::vector<double> one{1.0, 0.0};
    CHECK_FALSE(recovery_bound_ok(dup, one)); // mu = 1: 1 < 1 fails

    const Matrix d = random_dict(rng, 6, 12);
    const double mu = mutual_coherence(d);
    std::vector<double> code(12, 0.0);
    code[3] = 1.0;
    CHECK(recovery_bound_ok(d, code) == (1.0 < 0.5 * (1.0 + 1.0 / mu)));
}

TEST_CASE("one rnn cell update equals one nonnegative ista step") {
    Rng rng(12);
    // lambda = 0, z_prev = 0: both sides are relu of the scaled projection
    {
        SyntheticInstance inst = make_random_instance(rng, 6, 11, 3, 0.0);
        std::vector<double> y(6);
        for (double& v : y) v = rng.next_gaussian();
        CHECK(rnn_equiv_check(inst.problem, std::vector<double>(11, 0.0), y) < 1e-14);
    }
    // random nonnegative states
    for (int trial = 0; trial < 50; ++trial) {
        SyntheticInstance inst = make_random_instance(rng, 8, 16, 4, rng.uniform(0.0, 0.6));
        std::vector<double> z(16), y(8);
        for (double& v : z) v = std::abs(rng.next_gaussian());
        for (double& v : y) v = rng.next_gaussian();
        CHECK(rnn_equiv_check(inst.problem, z, y) < 1e-12);
    }
    // positive homogeneity at lambda = 0 with power-of-two scaling is exact
    {
        SyntheticInstance inst = make_random_instance(rng, 7, 12, 3, 0.0);
        std::vector<double> z(12), y(7);
        for (double& v : z) v = std::abs(rng.next_gaussian());
        for (double& v : y) v = rng.next_gaussian();
        const auto base = ista_step_nonneg(inst.problem, z, y);
        std::vector<double> z2 = z, y2 = y;
        for (double& v : z2) v *= 2.0;
        for (double& v : y2) v *= 2.0;
        const auto scaled = ista_step_nonneg(inst.problem, z2, y2);
        for (size_t i = 0; i < base.size(); ++i) CHECK(scaled[i] == 2.0 * base[i]);
        CHECK(rnn_equiv_check(inst.problem, z2, y2) < 1e-12);
    }
}

TEST_CASE("problem construction validates inputs") {
    Rng rng(13);
    Matrix d = random_dict(rng, 4, 6);
    CHECK_THROWS_AS(make_sparse_problem(d, std::vector<double>(3, 0.0), 0.1), ShapeError);
    CHECK_THROWS_AS(make_sparse_problem(d, std::vector<double>(4, 0.0), -0.1), ContractError);
    Matrix with_zero = d;
    for (int i = 0; i < 4; ++i) with_zero.at(i, 2) = 0.0;
    CHECK_THROWS_AS(make_sparse_problem(with_zero, std::vector<double>(4, 0.0), 0.1), DomainError);

    // c strictly above the gram spectral norm
    SparseProblem p = make_sparse_problem(d, std::vector<double>(4, 1.0), 0.1);
    CHECK(p.c > spectral_norm_sym(gram(p.dict)));
    CHECK(p.c == doctest::Approx(1.01 * spectral_norm_sym(gram(p.dict))).epsilon(1e-9));
}
