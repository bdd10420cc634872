# fig2: ids are 0-based, labels 1-based
states 7
label 0 1
label 1 2
label 2 3
label 3 4
label 4 5
label 5 6
label 6 7
edge 0 4
edge 1 3
edge 1 4
edge 2 5
edge 3 6
edge 4 6
init 0 1
error 5
block [1] 0
block [2] 1
block [3,4,5] 2 3 4
block [6] 5
block [7] 6
