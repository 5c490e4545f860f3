#include "cmdeg/rational.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace cmdeg {

namespace {

std::mutex g_bernoulli_mutex;
std::vector<ExactRational> g_bernoulli;  // B_0, B_1, ...

// Extends the table to index k inclusive. Caller holds the lock.
void grow_bernoulli(unsigned k) {
    if (g_bernoulli.empty()) {
        g_bernoulli.emplace_back(1);  // B_0
    }
    while (g_bernoulli.size() <= k) {
        unsigned m = static_cast<unsigned>(g_bernoulli.size());
        if (m > 1 && (m % 2) == 1) {
            g_bernoulli.emplace_back(0);
            continue;
        }
        // B_m = -1/(m+1) * sum_{j<m} C(m+1,j) B_j
        ExactRational acc(0);
        BigInt c(1);  // C(m+1, 0)
        for (unsigned j = 0; j < m; ++j) {
            if (g_bernoulli[j] != 0) acc += ExactRational(c) * g_bernoulli[j];
            // C(m+1, j+1) = C(m+1, j) * (m+1-j) / (j+1)
            c = c * (m + 1 - j) / (j + 1);
        }
        ExactRational bm = -acc / ExactRational(BigInt(m) + 1);
        g_bernoulli.push_back(std::move(bm));
    }
}

}  // namespace

const ExactRational& bernoulli(unsigned k) {
    std::lock_guard<std::mutex> lock(g_bernoulli_mutex);
    grow_bernoulli(k);
    return g_bernoulli[k];
}

BigInt factorial_big(unsigned n) {
    BigInt r(1);
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

BigInt binomial_big(unsigned n, unsigned k) {
    if (k > n) return BigInt(0);
    if (k > n - k) k = n - k;
    BigInt r(1);
    for (unsigned i = 0; i < k; ++i) {
        r = r * (n - i) / (i + 1);
    }
    return r;
}

namespace {

std::mutex g_coeff_mutex;
// digits -> coefficients B_{2j}/(2j)! (j = 0, 1, ...) at that precision
std::map<int, std::vector<Real>> g_coeff_tables;

}  // namespace

const std::vector<Real>& bernoulli_over_factorial(std::size_t max_j, int digits) {
    std::lock_guard<std::mutex> lock(g_coeff_mutex);
    auto& table = g_coeff_tables[digits];
    if (table.size() <= max_j) {
        ScopedPrecision guard(digits);
        {
            // Make sure the rational table is ready without nesting locks.
            std::lock_guard<std::mutex> block(g_bernoulli_mutex);
            grow_bernoulli(static_cast<unsigned>(2 * max_j));
        }
        BigInt fact = factorial_big(static_cast<unsigned>(2 * table.size()));
        for (std::size_t j = table.size(); j <= max_j; ++j) {
            ExactRational c;
            {
                std::lock_guard<std::mutex> block(g_bernoulli_mutex);
                c = g_bernoulli[2 * j] / ExactRational(fact);
            }
            table.emplace_back(Real(c));
            fact *= BigInt(2 * j + 1);
            fact *= BigInt(2 * j + 2);
        }
    }
    return table;
}

ExactRational zeta_even_pi_factor(unsigned n) {
    ExactRational b = bernoulli(2 * n);
    BigInt two_pow = BigInt(1) << (2 * n - 1);
    ExactRational r = b * ExactRational(two_pow) / ExactRational(factorial_big(2 * n));
    if ((n % 2) == 0) r = -r;
    return r;
}

}  // namespace cmdeg
