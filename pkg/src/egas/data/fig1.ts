# fig1: ids are 0-based, labels 1-based
states 9
label 0 1
label 1 2
label 2 3
label 3 4
label 4 5
label 5 6
label 6 7
label 7 8
label 8 9
edge 0 1
edge 0 3
edge 1 5
edge 2 6
edge 3 5
edge 4 6
edge 5 7
edge 6 8
block [1] 0
block [2,3] 1 2
block [4,5] 3 4
block [6] 5
block [7] 6
block [8,9] 7 8
