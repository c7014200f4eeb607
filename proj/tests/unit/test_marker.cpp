#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "delcode/marker.hpp"
#include "doctest.h"

using namespace delcode;

TEST_CASE("seed 0 is the identity permutation") {
    const auto il = Interleaver::make(5, 0);
    CHECK(il.perm() == std::vector<std::size_t>{0, 1, 2, 3, 4});
    const BitSeq c{1, 0, 0, 1, 1};
    CHECK(il.interleave(c) == c);
}

TEST_CASE("random interleaver is a bijection and round-trips") {
    const auto il = Interleaver::make(5, 7);
    auto sorted = il.perm();
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4});
    const BitSeq c{1, 1, 0, 1, 0};
    CHECK(il.deinterleave(il.interleave(c)) == c);

    Rng r(3);
    const auto big = Interleaver::make(204, 99);
    for (int t = 0; t < 20; ++t) {
        const auto v = r.bits(204);
        CHECK(big.deinterleave(big.interleave(v)) == v);
    }
}

TEST_CASE("transposition example") {
    const Interleaver swap({1, 0});
    CHECK(swap.interleave(BitSeq{1, 0}) == BitSeq{0, 1});
    CHECK(swap.deinterleave_llrs(std::vector<double>{2.5, -1.0}) == std::vector<double>{-1.0, 2.5});
}

TEST_CASE("deinterleave_llrs inverts interleave positionally") {
    const auto il = Interleaver::make(31, 4);
    std::vector<double> l(31);
    std::iota(l.begin(), l.end(), 0.0);
    // LLR i belongs to transmitted position i, i.e. coded position perm[i]
    const auto back = il.deinterleave_llrs(l);
    for (std::size_t i = 0; i < 31; ++i)
        CHECK(back[il.perm()[i]] == doctest::Approx(static_cast<double>(i)));
}

TEST_CASE("golden permutation n=204 seed=42") {
    // Frozen from tests/oracles/interleaver_golden.py, an independent
    // re-implementation of the generator.
    std::ifstream f(std::string(DELCODE_TEST_DATA) + "/interleaver_204_42.txt");
    REQUIRE(f);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto golden = Interleaver::from_text(ss.str());
    CHECK(Interleaver::make(204, 42).perm() == golden.perm());
    CHECK(Interleaver::make(204, 42).perm() == Interleaver::make(204, 42).perm());
}

TEST_CASE("interleaver text format and validation") {
    const auto il = Interleaver::make(10, 5);
    CHECK(Interleaver::from_text(il.to_text()).perm() == il.perm());
    CHECK_THROWS_AS(Interleaver::from_text("1 2 2"), Error);
    CHECK_THROWS_AS(Interleaver::from_text("0 1 2"), Error);
    CHECK_THROWS_AS(Interleaver::from_text("1 x 3"), Error);
    CHECK_THROWS_AS(il.interleave(BitSeq(9)), LengthMismatch);
    CHECK_THROWS_AS(il.deinterleave_llrs(std::vector<double>(11)), LengthMismatch);

    const auto path = std::filesystem::temp_directory_path() / "delcode_il_test.txt";
    il.save(path);
    CHECK(Interleaver::load(path).perm() == il.perm());
    std::filesystem::remove(path);
}

TEST_CASE("insert_markers layouts") {
    MarkerConfig cfg;  // marker 01, nc 5
    CHECK(insert_markers(BitSeq{1, 1, 0, 0, 1}, cfg) == BitSeq{1, 1, 0, 0, 1, 0, 1});

    const auto ten = insert_markers(BitSeq(10, 1), cfg);
    REQUIRE(ten.size() == 14);
    CHECK(ten[5] == 0);
    CHECK(ten[6] == 1);
    CHECK(ten[12] == 0);
    CHECK(ten[13] == 1);

    MarkerConfig c10{{0, 1}, 10};
    CHECK(insert_markers(BitSeq(204, 0), c10).size() == 244);
    CHECK(c10.frame_length(204) == 244);
    // trailing partial block gets no marker
    CHECK(insert_markers(BitSeq{1, 1, 1, 1, 1, 1, 1}, cfg) == BitSeq{1, 1, 1, 1, 1, 0, 1, 1, 1});
    for (std::size_t n : {1u, 4u, 5u, 6u, 204u, 210u})
        CHECK(insert_markers(BitSeq(n, 1), cfg).size() == n + 2 * (n / 5));
}

TEST_CASE("marker_mask") {
    MarkerConfig cfg;
    CHECK(marker_mask(cfg, 5) == std::vector<bool>{false, false, false, false, false, true, true});
    CHECK(marker_mask(cfg, 4) == std::vector<bool>(4, false));
    MarkerConfig c10{{0, 1}, 10};
    const auto m = marker_mask(c10, 204);
    CHECK(m.size() == 244);
    CHECK(std::count(m.begin(), m.end(), true) == 40);

    // the mask marks exactly where insert_markers put marker bits
    MarkerConfig odd{{1, 0, 1}, 3};
    Rng r(8);
    const auto c = r.bits(17);
    const auto x = insert_markers(c, odd);
    const auto mm = marker_mask(odd, 17);
    std::size_t ci = 0, mi = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (mm[t]) {
            CHECK(x[t] == odd.marker[mi % 3]);
            ++mi;
        } else {
            CHECK(x[t] == c[ci++]);
        }
    }
    CHECK(ci == 17);
}

TEST_CASE("strip_marker_llrs") {
    MarkerConfig cfg;
    const std::vector<double> l{1, 2, 3, 4, 5, 6, 7};
    CHECK(strip_marker_llrs(l, cfg, 5) == std::vector<double>{1, 2, 3, 4, 5});
    const std::vector<double> short_l{1, 2, 3, 4};
    CHECK(strip_marker_llrs(short_l, cfg, 4) == short_l);
    CHECK_THROWS_AS(strip_marker_llrs(l, cfg, 6), LengthMismatch);

    // reinserting values at non-marker positions then stripping is the identity
    const std::size_t n = 23;
    std::vector<double> coded(n);
    std::iota(coded.begin(), coded.end(), 1.0);
    const auto mask = marker_mask(cfg, n);
    std::vector<double> full;
    std::size_t j = 0;
    for (bool is_marker : mask)
        full.push_back(is_marker ? 0.0 : coded[j++]);
    CHECK(strip_marker_llrs(full, cfg, n) == coded);
}

TEST_CASE("overall rate") {
    CHECK(overall_rate(MarkerConfig{{0, 1}, 5}, 102, 204) == Rational{5, 14});
    CHECK(overall_rate(MarkerConfig{{0, 1}, 10}, 102, 204) == Rational{5, 12});
    CHECK(overall_rate(MarkerConfig{{0, 1}, 10}, 102, 204).value() == doctest::Approx(0.4167).epsilon(1e-3));
    CHECK(overall_rate(MarkerConfig{{}, 5}, 102, 204) == Rational{1, 2});
    // monotone in nc
    double prev = 0.0;
    for (std::size_t nc = 1; nc < 30; ++nc) {
        const double r = overall_rate(MarkerConfig{{0, 1}, nc}, 105, 210).value();
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("marker config validation") {
    CHECK_THROWS_AS((MarkerConfig{{}, 5}.validate()), Error);
    CHECK_THROWS_AS((MarkerConfig{{0, 1}, 0}.validate()), Error);
    CHECK_THROWS_AS((MarkerConfig{{0, 2}, 5}.validate()), Error);
    CHECK_THROWS_AS(Interleaver::make(0, 1), Error);
}
