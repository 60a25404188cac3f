#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/checkpoint.hpp"
#include "vtm/losses.hpp"
#include "vtm/models.hpp"
#include "vtm/representation.hpp"

namespace vtm {

// Learning rate at a given 1-based epoch: base * factor^(epoch / interval),
// evaluated by repeated multiplication so the default factor 0.5 halves the
// value exactly (epoch 100 under defaults is exactly 5e-5).
double lr_for_epoch(double base_lr, int epoch, int interval = 100,
                    double factor = 0.5);

struct TrainConfig {
    int epochs = 500;
    int batch = 100;    // motion-autoencoder default; the joint stage uses 64
    double lr = 1e-4;
    int lr_decay_interval = 100;
    double lr_decay_factor = 0.5;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    int threads = 1;    // batch shards with fixed-order gradient reduction
    JointWeights joint_weights = JointWeights::canonical();
    LossWeights loss_weights; // joint stage only

    void validate() const; // ConfigError on nonsensical values
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<std::string> log_lines; // one comma-separated line per epoch
    double final_loss = 0.0;            // mean total loss over the last epoch
};

// Trains the two-part motion autoencoder. Windows must all have a frame
// count that is a positive multiple of 4. Log lines are
// "epoch, lr, L_rec, L_s" with per-epoch means; identical configuration and
// seed reproduce the checkpoint bit for bit. `log`, when given, receives each
// line as it is produced.
TrainResult train_tpmae(const std::vector<TrainingWindow>& windows,
                        const Skeleton& virtual_skeleton,
                        const NormStats& stats, const TrainConfig& config,
                        std::ostream* log = nullptr);

// Joint stage: trains the visual encoder together with the (pre-trained)
// motion autoencoder, starting from a tpmae checkpoint whose skeleton and
// statistics are reused. Windows additionally need keypoints, bone ratios
// and (in file mode) per-frame features. Log lines are
// "epoch, lr, L_rec, L_s, L_ma, L_b, L_pred, L_s_v".
TrainResult train_vtm(const std::vector<TrainingWindow>& windows,
                      const Camera& cam, const Checkpoint& tpmae_checkpoint,
                      const FeatureProvider& provider,
                      const TrainConfig& config, std::ostream* log = nullptr);

// Rebuilds models from a checkpoint written by the trainers above.
TpmaeModel tpmae_from_checkpoint(const Checkpoint& ckpt);
TpveModel tpve_from_checkpoint(const Checkpoint& ckpt);

} // namespace vtm
