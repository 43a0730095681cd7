#pragma once

#include "cid/functional.hpp"
#include "cid/model.hpp"

#include <string>

namespace cidtest {

std::string model_path(const std::string& file);

/// Parsed fixture from models/.
cid::Diagram load(const std::string& file);

/// smoke -> lung cancer with P(yes | no) = p_no and P(yes | yes) = p_yes.
cid::Diagram m1(double p_no = 0.05, double p_yes = 0.2);

}  // namespace cidtest
