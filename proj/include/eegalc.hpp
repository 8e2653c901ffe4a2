#pragma once

#include "eegalc/error.hpp"
#include "eegalc/matrix.hpp"
#include "eegalc/rng.hpp"
#include "eegalc/checksum.hpp"

#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/ingest/gzip.hpp"
#include "eegalc/ingest/trial_text.hpp"
#include "eegalc/ingest/long_csv.hpp"
#include "eegalc/ingest/split.hpp"
#include "eegalc/ingest/trial_store.hpp"

#include "eegalc/dsp/fft.hpp"
#include "eegalc/dsp/morlet.hpp"
#include "eegalc/dsp/swt.hpp"
#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/pca.hpp"
#include "eegalc/dsp/export.hpp"
#include "eegalc/dsp/config.hpp"

#include "eegalc/features/correlation.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/features/tensor_io.hpp"
#include "eegalc/features/group_stats.hpp"
#include "eegalc/features/svg.hpp"

#include "eegalc/ml/models.hpp"

#include "eegalc/cnn/network.hpp"
#include "eegalc/cnn/train.hpp"
#include "eegalc/cnn/gradcheck.hpp"
#include "eegalc/cnn/model_io.hpp"

#include "eegalc/harness/config.hpp"
#include "eegalc/harness/matrix.hpp"
#include "eegalc/harness/report.hpp"
#include "eegalc/harness/verify.hpp"
#include "eegalc/harness/synthetic.hpp"
