#include "fixtures.hpp"

#include "cid/model_io.hpp"

namespace cidtest {

std::string model_path(const std::string& file) { return std::string(CID_MODELS_DIR) + "/" + file; }

cid::Diagram load(const std::string& file) { return cid::parse_model(cid::read_text_file(model_path(file))); }

cid::Diagram m1(double p_no, double p_yes) {
    cid::Diagram d;
    d.add_decision("smoke", {"no", "yes"});
    d.add_chance("lung cancer", {"no", "yes"}, {"smoke"}, {{1 - p_no, p_no}, {1 - p_yes, p_yes}});
    d.decision_order = std::vector<std::string>{"smoke"};
    d.annotations.causal = true;
    return d;
}

}  // namespace cidtest
