#pragma once

#include <functional>
#include <string>
#include <vector>

#include "seqprobe/gradcheck.hpp"

namespace seqprobe {

struct GradCheckComponent {
    std::string name;
    std::function<GradCheckReport(uint64_t seed)> run;
};

// LSTM cell, Bi-LSTM layer, attention, decoder step, linear probe, MLP —
// each at toy size in 64-bit.
std::vector<GradCheckComponent> standard_grad_checks();

struct GradCheckSuiteRow {
    std::string component;
    double max_rel_err = 0.0;
    bool pass = false;
};

std::vector<GradCheckSuiteRow> run_grad_check_suite(
    const std::vector<GradCheckComponent>& components, const std::vector<uint64_t>& seeds,
    double tolerance);

}  // namespace seqprobe
