#pragma once

#include "peic/aho_corasick.hpp"
#include "peic/analytics.hpp"
#include "peic/bloom.hpp"
#include "peic/bytes.hpp"
#include "peic/csv.hpp"
#include "peic/error.hpp"
#include "peic/filter_image.hpp"
#include "peic/packet.hpp"
#include "peic/pcap.hpp"
#include "peic/pipeline.hpp"
#include "peic/signature.hpp"
#include "peic/traffic.hpp"
