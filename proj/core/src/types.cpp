#include "inspecta/types.hpp"

#include "inspecta/error.hpp"

namespace inspecta {

const char* to_string(Label label) {
    return label == Label::ok ? "OK" : "NG";
}

const char* to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::holdout: return "holdout";
    }
    return "?";
}

Label label_from_string(const std::string& text) {
    if (text == "OK") return Label::ok;
    if (text == "NG") return Label::ng;
    throw ValidationError("unknown label '" + text + "' (want OK or NG)");
}

Split split_from_string(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "validation") return Split::validation;
    if (text == "holdout") return Split::holdout;
    throw ValidationError("unknown split '" + text + "' (want train, validation or holdout)");
}

Label label_of(const Sample& sample) {
    return sample.gt_boxes.empty() ? Label::ok : Label::ng;
}

}  // namespace inspecta
