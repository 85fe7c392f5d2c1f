"""MAC and PHY constants (2.4 GHz band defaults), all durations in symbols."""

A_BASE_SLOT_DURATION = 60
A_NUM_SUPERFRAME_SLOTS = 16
A_BASE_SUPERFRAME_DURATION = A_BASE_SLOT_DURATION * A_NUM_SUPERFRAME_SLOTS  # 960
A_UNIT_BACKOFF_PERIOD = 20
A_MAX_BE = 5
MAC_MIN_BE = 3
MAC_MAX_CSMA_BACKOFFS = 5
MAC_MAX_FRAME_RETRIES = 3
A_MAX_GTS = 7
A_MIN_CAP_LENGTH = 440
A_MAX_LOST_BEACONS = 4
A_GTS_DESC_PERSISTENCE_TIME = 4
A_RESPONSE_WAIT_TIME = 32 * A_BASE_SUPERFRAME_DURATION

CCA_DURATION = 8
ACK_TURNAROUND = 12  # aTurnaroundTime: end of frame -> start of its ACK
ACK_WAIT_DURATION = 54  # macAckWaitDuration, measured from end of frame
MAC_SIFS_PERIOD = 12
MAC_LIFS_PERIOD = 40
A_MAX_SIFS_FRAME_SIZE = 18  # bytes

MAX_ORDER = 14
CHANNEL = 11
PAN_ID = 0
