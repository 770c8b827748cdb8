#include "core/attention_control.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace stereodiff {

nn::Mat<double> attention(const nn::Mat<double>& Q, const nn::Mat<double>& K,
                          const nn::Mat<double>& V) {
    check(Q.cols() > 0, "attention requires a positive feature dimension");
    check(K.cols() == Q.cols(), "attention: query/key dimensions differ");
    check(V.rows() == K.rows(), "attention: key/value token counts differ");
    const double scale = 1.0 / std::sqrt(double(Q.cols()));
    nn::Mat<double> logits = (Q * K.transpose()) * scale;
    return nn::softmax_rows<double>(logits) * V;
}

std::pair<Grid, Grid> paired_denoise(const Grid& left, const Grid& right, int label,
                                     const Condition& cond_left, const Condition& cond_right,
                                     AttentionPlan plan, const Denoiser& den,
                                     AttnRecorder<float>* rec) {
    check_same_shape(left, right, "paired_denoise");
    if (plan != AttentionPlan::none)
        check(den.supports_attention_control(),
              "attention plan requires a denoiser with attention interception");
    return den.epsilon_pair(left, right, label, cond_left, cond_right, plan, rec);
}

} // namespace stereodiff
